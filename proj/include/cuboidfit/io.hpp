#pragma once

// JSONL persistence: one frame object per line.
//
//   {"schema_version":1, "frame_id":..., "cameras":[...], "objects":[...]}
//
// Doubles are written in shortest round-trip form, so write then read is
// lossless. Parse failures carry the 1-based line number and a field path.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuboidfit/dataset.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"

namespace cuboidfit {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace io_detail {

class Reader {
 public:
  explicit Reader(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& path, const std::string& why) const {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_) + ": field '" + path + "': " + why);
  }

  const Json& at(const Json& j, const std::string& key, const std::string& path) const {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(join(path, key), "missing");
    return *it;
  }

  double number(const Json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
  }

  double number(const Json& j, const std::string& key, const std::string& path) const {
    return number(at(j, key, path), join(path, key));
  }

  int integer(const Json& j, const std::string& key, const std::string& path) const {
    const Json& v = at(j, key, path);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    return v.get<int>();
  }

  std::string string(const Json& j, const std::string& key, const std::string& path) const {
    const Json& v = at(j, key, path);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
  }

  const Json& array(const Json& j, const std::string& key, const std::string& path,
                    std::optional<std::size_t> size = std::nullopt) const {
    const Json& v = at(j, key, path);
    if (!v.is_array()) fail(join(path, key), "expected an array");
    if (size && v.size() != *size) {
      fail(join(path, key), "expected " + std::to_string(*size) + " elements");
    }
    return v;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

  Box3D box3d(const Json& j, const std::string& path) const {
    Box3D b;
    b.x = number(j, "x", path);
    b.y = number(j, "y", path);
    b.z = number(j, "z", path);
    b.l = number(j, "l", path);
    b.w = number(j, "w", path);
    b.h = number(j, "h", path);
    b.yaw = normalize_angle(number(j, "yaw", path));
    if (!(b.l > 0)) fail(join(path, "l"), "must be > 0");
    if (!(b.w > 0)) fail(join(path, "w"), "must be > 0");
    if (!(b.h > 0)) fail(join(path, "h"), "must be > 0");
    return b;
  }

  Box2D box2d(const Json& j, const std::string& path) const {
    Box2D b;
    b.x_min = number(j, "x_min", path);
    b.y_min = number(j, "y_min", path);
    b.x_max = number(j, "x_max", path);
    b.y_max = number(j, "y_max", path);
    if (b.x_min > b.x_max) fail(join(path, "x_min"), "x_min > x_max");
    if (b.y_min > b.y_max) fail(join(path, "y_min"), "y_min > y_max");
    return b;
  }

  RefineParams params(const Json& j, const std::string& path) const {
    if (!j.is_array() || j.size() != 4) fail(path, "expected 4 numbers");
    std::array<double, 4> a{};
    for (std::size_t i = 0; i < 4; ++i) a[i] = number(j[i], index(path, i));
    const RefineParams d = RefineParams::from_array(a);
    if (!is_valid(d)) fail(path, "components must lie in (0, 2)");
    return d;
  }

  CameraModel camera(const Json& j, const std::string& path) const {
    CameraModel c;
    c.name = string(j, "name", path);
    c.fx = number(j, "fx", path);
    c.fy = number(j, "fy", path);
    c.cx = number(j, "cx", path);
    c.cy = number(j, "cy", path);
    c.width = integer(j, "width", path);
    c.height = integer(j, "height", path);
    if (!(c.fx > 0 && c.fy > 0)) fail(join(path, "fx"), "focal lengths must be > 0");
    if (c.width <= 0 || c.height <= 0) fail(join(path, "width"), "image size must be positive");
    const std::string ep = join(path, "ego_to_cam");
    const Json& e = at(j, "ego_to_cam", path);
    const Json& r = array(e, "rotation", ep, 9);
    const Json& t = array(e, "translation", ep, 3);
    for (int i = 0; i < 9; ++i) {
      c.rotation(i / 3, i % 3) = number(r[static_cast<std::size_t>(i)],
                                        index(join(ep, "rotation"), static_cast<std::size_t>(i)));
    }
    for (int i = 0; i < 3; ++i) {
      c.translation[i] = number(t[static_cast<std::size_t>(i)],
                                index(join(ep, "translation"), static_cast<std::size_t>(i)));
    }
    if (!is_valid(c)) fail(join(ep, "rotation"), "must be a proper rotation");
    return c;
  }

  void schema(const Json& j) const {
    const int v = integer(j, "schema_version", "");
    if (v != kSchemaVersion) {
      throw Error(ErrorCode::SchemaVersionMismatch,
                  "line " + std::to_string(line_) + ": schema_version " + std::to_string(v) +
                      ", expected " + std::to_string(kSchemaVersion));
    }
  }

 private:
  std::size_t line_;
};

inline Json parse_line(const std::string& text, std::size_t line) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + e.what());
  }
}

template <class F>
void for_each_line(std::istream& in, F&& f) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    f(parse_line(text, line), line);
  }
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  return in;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

}  // namespace io_detail

inline Json to_json(const Box3D& b) {
  return Json{{"x", b.x}, {"y", b.y}, {"z", b.z}, {"l", b.l}, {"w", b.w}, {"h", b.h}, {"yaw", b.yaw}};
}

inline Json to_json(const Box2D& b) {
  return Json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
}

inline Json to_json(const RefineParams& d) { return Json::array({d.d_l, d.d_r, d.d_u, d.d_d}); }

inline Json to_json(const CameraModel& c) {
  Json rot = Json::array();
  for (int i = 0; i < 9; ++i) rot.push_back(c.rotation(i / 3, i % 3));
  return Json{{"name", c.name},
              {"fx", c.fx},
              {"fy", c.fy},
              {"cx", c.cx},
              {"cy", c.cy},
              {"width", c.width},
              {"height", c.height},
              {"ego_to_cam",
               Json{{"rotation", rot},
                    {"translation", Json::array({c.translation.x(), c.translation.y(),
                                                 c.translation.z()})}}}};
}

inline Json to_json(const Frame& f) {
  Json cams = Json::array();
  for (const auto& c : f.cameras) cams.push_back(to_json(c));
  Json objs = Json::array();
  for (const auto& o : f.objects) {
    Json gt = Json::object();
    for (const auto& [name, box] : o.gt_box2d) gt[name] = to_json(box);
    objs.push_back(Json{{"object_id", o.object_id},
                        {"box3d", to_json(o.box3d)},
                        {"gt_box2d", gt},
                        {"planted_params", o.planted_params ? to_json(*o.planted_params) : Json()}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"frame_id", f.frame_id},
              {"cameras", cams},
              {"objects", objs}};
}

inline Frame frame_from_json(const Json& j, std::size_t line = 1) {
  const io_detail::Reader r(line);
  r.schema(j);
  Frame f;
  f.frame_id = r.string(j, "frame_id", "");
  const Json& cams = r.array(j, "cameras", "");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    f.cameras.push_back(r.camera(cams[i], r.index("cameras", i)));
    for (std::size_t k = 0; k < i; ++k) {
      if (f.cameras[k].name == f.cameras[i].name) {
        r.fail(r.index("cameras", i) + ".name", "duplicate camera '" + f.cameras[i].name + "'");
      }
    }
  }
  const Json& objs = r.array(j, "objects", "");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string p = r.index("objects", i);
    ObjectRecord o;
    o.object_id = r.string(objs[i], "object_id", p);
    if (f.find_object(o.object_id)) r.fail(p + ".object_id", "duplicate '" + o.object_id + "'");
    o.box3d = r.box3d(r.at(objs[i], "box3d", p), p + ".box3d");
    if (objs[i].contains("gt_box2d") && !objs[i]["gt_box2d"].is_null()) {
      const Json& gt = objs[i]["gt_box2d"];
      if (!gt.is_object()) r.fail(p + ".gt_box2d", "expected an object");
      for (const auto& [name, box] : gt.items()) {
        const std::string gp = p + ".gt_box2d." + name;
        if (!f.find_camera(name)) r.fail(gp, "unknown camera");
        o.gt_box2d[name] = r.box2d(box, gp);
      }
    }
    if (objs[i].contains("planted_params") && !objs[i]["planted_params"].is_null()) {
      o.planted_params = r.params(objs[i]["planted_params"], p + ".planted_params");
    }
    f.objects.push_back(std::move(o));
  }
  return f;
}

inline std::string to_jsonl(const std::vector<Frame>& frames) {
  std::string out;
  for (const auto& f : frames) {
    out += to_json(f).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<Frame> parse_frames(std::istream& in) {
  std::vector<Frame> frames;
  io_detail::for_each_line(in, [&](const Json& j, std::size_t line) {
    frames.push_back(frame_from_json(j, line));
  });
  return frames;
}

inline std::vector<Frame> parse_frames(const std::string& text) {
  std::istringstream in(text);
  return parse_frames(in);
}

inline std::vector<Frame> read_frames(const std::string& path) {
  auto in = io_detail::open_in(path);
  return parse_frames(in);
}

inline void write_frames(const std::vector<Frame>& frames, const std::string& path) {
  io_detail::write_text(path, to_jsonl(frames));
}

// Truth sidecar: one line per frame with the planted parameters and cuboids.

inline Json to_json(const FrameTruth& t) {
  Json objs = Json::array();
  for (const auto& o : t.objects) {
    objs.push_back(Json{{"object_id", o.object_id},
                        {"camera", o.camera},
                        {"planted_params", to_json(o.planted_params)},
                        {"true_box3d", to_json(o.true_box3d)},
                        {"true_box2d", to_json(o.true_box2d)}});
  }
  return Json{{"schema_version", kSchemaVersion}, {"frame_id", t.frame_id}, {"objects", objs}};
}

inline FrameTruth truth_from_json(const Json& j, std::size_t line = 1) {
  const io_detail::Reader r(line);
  r.schema(j);
  FrameTruth t;
  t.frame_id = r.string(j, "frame_id", "");
  const Json& objs = r.array(j, "objects", "");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string p = r.index("objects", i);
    TruthRecord o;
    o.object_id = r.string(objs[i], "object_id", p);
    o.camera = r.string(objs[i], "camera", p);
    o.planted_params = r.params(r.at(objs[i], "planted_params", p), p + ".planted_params");
    o.true_box3d = r.box3d(r.at(objs[i], "true_box3d", p), p + ".true_box3d");
    o.true_box2d = r.box2d(r.at(objs[i], "true_box2d", p), p + ".true_box2d");
    t.objects.push_back(std::move(o));
  }
  return t;
}

inline std::string to_jsonl(const std::vector<FrameTruth>& truth) {
  std::string out;
  for (const auto& t : truth) {
    out += to_json(t).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<FrameTruth> read_truth(const std::string& path) {
  auto in = io_detail::open_in(path);
  std::vector<FrameTruth> out;
  io_detail::for_each_line(in, [&](const Json& j, std::size_t line) {
    out.push_back(truth_from_json(j, line));
  });
  return out;
}

inline void write_truth(const std::vector<FrameTruth>& truth, const std::string& path) {
  io_detail::write_text(path, to_jsonl(truth));
}

/// Synth config document. Every key is optional:
///   {"seed", "n_frames", "objects_per_frame", "param_range":[lo,hi],
///    "pose_noise":{"translation","yaw"}, "gt2d_fraction", "rig":[camera...]}
/// Errors name the offending field.
inline SynthConfig synth_config_from_json(const Json& j) {
  const io_detail::Reader r(1);
  SynthConfig c;
  if (!j.is_object()) r.fail("", "config must be a JSON object");
  const auto bad = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, field + ": " + why);
  };
  static const std::set<std::string> known{"seed",       "n_frames",      "objects_per_frame",
                                           "param_range", "pose_noise",    "gt2d_fraction",
                                           "rig"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) bad(key, "unknown field");
  }
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n_frames")) c.n_frames = j["n_frames"].get<int>();
    if (j.contains("objects_per_frame")) c.objects_per_frame = j["objects_per_frame"].get<int>();
    if (j.contains("param_range")) {
      const Json& pr = j["param_range"];
      if (!pr.is_array() || pr.size() != 2) bad("param_range", "expected [lo, hi]");
      c.param_lo = pr[0].get<double>();
      c.param_hi = pr[1].get<double>();
    }
    if (j.contains("pose_noise")) {
      const Json& pn = j["pose_noise"];
      if (!pn.is_object()) bad("pose_noise", "expected an object");
      if (pn.contains("translation")) c.pose_noise_translation = pn["translation"].get<double>();
      if (pn.contains("yaw")) c.pose_noise_yaw = pn["yaw"].get<double>();
    }
    if (j.contains("gt2d_fraction")) c.gt2d_fraction = j["gt2d_fraction"].get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  if (j.contains("rig")) {
    const Json& rig = j["rig"];
    if (!rig.is_array()) bad("rig", "expected an array of cameras");
    c.rig.clear();
    for (std::size_t i = 0; i < rig.size(); ++i) {
      try {
        c.rig.push_back(r.camera(rig[i], r.index("rig", i)));
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidArgument, e.what());
      }
    }
  }
  validate(c);
  return c;
}

inline SynthConfig read_synth_config(const std::string& path) {
  auto in = io_detail::open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  return synth_config_from_json(j);
}

}  // namespace cuboidfit
