#pragma once

// Before/after evaluation of refined boxes against 2D targets: average IoU,
// recall at fixed IoU thresholds, and 3D/BEV overlap with the input boxes.

#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "cuboidfit/dataset.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"
#include "cuboidfit/io.hpp"
#include "cuboidfit/solver.hpp"

namespace cuboidfit {

inline constexpr std::array<double, 3> kRecallThresholds{0.5, 0.7, 0.9};

struct EvalStats {
  std::size_t count = 0;
  double avg_iou_before = 0, avg_iou_after = 0;
  std::array<double, 3> recall_before{}, recall_after{};
  double mean_bev_iou = 0, mean_iou_3d = 0;
};

struct EvalReport {
  std::vector<std::string> cameras;  // column order
  std::map<std::string, EvalStats> per_camera;
  EvalStats aggregate;
};

/// A 2D target for one object in one camera.
struct EvalTarget {
  std::string frame_id, object_id, camera;
  Box2D box;
};

inline std::vector<EvalTarget> targets_from_truth(const std::vector<FrameTruth>& truth) {
  std::vector<EvalTarget> out;
  for (const auto& f : truth) {
    for (const auto& o : f.objects) out.push_back({f.frame_id, o.object_id, o.camera, o.true_box2d});
  }
  return out;
}

inline std::vector<EvalTarget> targets_from_frames(const std::vector<Frame>& frames) {
  std::vector<EvalTarget> out;
  for (const auto& f : frames) {
    for (const auto& o : f.objects) {
      for (const auto& [cam, box] : o.gt_box2d) out.push_back({f.frame_id, o.object_id, cam, box});
    }
  }
  return out;
}

namespace eval_detail {

struct Accum {
  std::size_t n = 0;
  double before = 0, after = 0, bev = 0, iou3 = 0;
  std::array<std::size_t, 3> hit_before{}, hit_after{};

  void add(double ib, double ia, double bev_iou, double iou3d) {
    ++n;
    before += ib;
    after += ia;
    bev += bev_iou;
    iou3 += iou3d;
    for (std::size_t t = 0; t < kRecallThresholds.size(); ++t) {
      hit_before[t] += ib >= kRecallThresholds[t];
      hit_after[t] += ia >= kRecallThresholds[t];
    }
  }

  EvalStats stats() const {
    EvalStats s;
    s.count = n;
    if (n == 0) return s;
    const double d = static_cast<double>(n);
    s.avg_iou_before = before / d;
    s.avg_iou_after = after / d;
    s.mean_bev_iou = bev / d;
    s.mean_iou_3d = iou3 / d;
    for (std::size_t t = 0; t < kRecallThresholds.size(); ++t) {
      s.recall_before[t] = static_cast<double>(hit_before[t]) / d;
      s.recall_after[t] = static_cast<double>(hit_after[t]) / d;
    }
    return s;
  }
};

using ObjectIndex = std::map<std::pair<std::string, std::string>, const ObjectRecord*>;

inline ObjectIndex index_objects(const std::vector<Frame>& frames) {
  ObjectIndex idx;
  for (const auto& f : frames) {
    for (const auto& o : f.objects) idx[{f.frame_id, o.object_id}] = &o;
  }
  return idx;
}

}  // namespace eval_detail

/// Throws InvalidArgument naming the first object id present on one side only.
inline EvalReport evaluate(const std::vector<Frame>& before, const std::vector<Frame>& after,
                           const std::vector<EvalTarget>& targets) {
  const auto bi = eval_detail::index_objects(before);
  const auto ai = eval_detail::index_objects(after);
  for (const auto& [key, _] : bi) {
    if (!ai.count(key)) {
      throw Error(ErrorCode::InvalidArgument,
                  "object " + key.first + "/" + key.second + " is missing from the after set");
    }
  }
  for (const auto& [key, _] : ai) {
    if (!bi.count(key)) {
      throw Error(ErrorCode::InvalidArgument,
                  "object " + key.first + "/" + key.second + " is missing from the before set");
    }
  }
  std::map<std::string, const Frame*> frames;
  for (const auto& f : before) frames[f.frame_id] = &f;

  EvalReport report;
  for (const auto& f : before) {
    for (const auto& c : f.cameras) {
      if (std::find(report.cameras.begin(), report.cameras.end(), c.name) == report.cameras.end()) {
        report.cameras.push_back(c.name);
      }
    }
  }
  std::map<std::string, eval_detail::Accum> per_cam;
  eval_detail::Accum all;
  for (const auto& t : targets) {
    const auto key = std::make_pair(t.frame_id, t.object_id);
    const auto b = bi.find(key);
    if (b == bi.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  "target object " + t.frame_id + "/" + t.object_id + " is not in the dataset");
    }
    const CameraModel* cam = frames.at(t.frame_id)->find_camera(t.camera);
    if (!cam) throw Error(ErrorCode::UnknownCamera, "camera '" + t.camera + "' not in " + t.frame_id);
    const Box3D& in = b->second->box3d;
    const Box3D& out = ai.at(key)->box3d;
    const double ib = projected_iou(*cam, in, t.box);
    const double ia = projected_iou(*cam, out, t.box);
    const double bev = iou_bev(in, out);
    const double i3 = iou_3d(in, out);
    per_cam[t.camera].add(ib, ia, bev, i3);
    all.add(ib, ia, bev, i3);
  }
  for (const auto& name : report.cameras) report.per_camera[name] = per_cam[name].stats();
  report.aggregate = all.stats();
  return report;
}

namespace eval_detail {

inline std::string fixed(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace eval_detail

/// Text table: rows are metrics, columns are cameras plus the average.
inline std::string format_table(const EvalReport& r) {
  using eval_detail::fixed;
  using eval_detail::pad;
  constexpr std::size_t kLabel = 18, kCol = 16;
  std::vector<std::pair<std::string, const EvalStats*>> cols;
  for (const auto& name : r.cameras) cols.emplace_back(name, &r.per_camera.at(name));
  cols.emplace_back("average", &r.aggregate);

  std::string out = std::string(kLabel, ' ');
  for (const auto& [name, _] : cols) out += pad(name, kCol);
  out += '\n';
  const auto row = [&](const std::string& label, auto cell) {
    std::string line = label + std::string(kLabel - label.size(), ' ');
    for (const auto& [_, s] : cols) line += pad(cell(*s), kCol);
    out += line + '\n';
  };
  const auto delta = [](double b, double a) { return fixed(b) + " -> " + fixed(a); };
  row("Avg. IoU", [&](const EvalStats& s) { return delta(s.avg_iou_before, s.avg_iou_after); });
  for (std::size_t t = 0; t < kRecallThresholds.size(); ++t) {
    row("Recall(IoU>=" + fixed(kRecallThresholds[t], 1) + ")",
        [&](const EvalStats& s) { return delta(s.recall_before[t], s.recall_after[t]); });
  }
  row("BEV IoU in/out", [](const EvalStats& s) { return fixed(s.mean_bev_iou); });
  row("3D IoU in/out", [](const EvalStats& s) { return fixed(s.mean_iou_3d); });
  row("Count", [](const EvalStats& s) { return std::to_string(s.count); });
  return out;
}

/// Flat key/value document, e.g. {"front.avg_iou_after": 0.81, ...}.
inline Json report_to_json(const EvalReport& r) {
  Json j = Json::object();
  const auto put = [&](const std::string& prefix, const EvalStats& s) {
    j[prefix + ".count"] = s.count;
    j[prefix + ".avg_iou_before"] = s.avg_iou_before;
    j[prefix + ".avg_iou_after"] = s.avg_iou_after;
    for (std::size_t t = 0; t < kRecallThresholds.size(); ++t) {
      const std::string th = eval_detail::fixed(kRecallThresholds[t], 1);
      j[prefix + ".recall_before@" + th] = s.recall_before[t];
      j[prefix + ".recall_after@" + th] = s.recall_after[t];
    }
    j[prefix + ".mean_bev_iou"] = s.mean_bev_iou;
    j[prefix + ".mean_iou_3d"] = s.mean_iou_3d;
  };
  for (const auto& name : r.cameras) put(name, r.per_camera.at(name));
  put("all", r.aggregate);
  return j;
}

}  // namespace cuboidfit
