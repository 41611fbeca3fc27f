#pragma once

// Dataset-level steps behind the command-line tool: synth, match, refine,
// eval and render. Each step has an in-memory form and a file form.

#include <algorithm>
#include <atomic>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "cuboidfit/dataset.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/eval.hpp"
#include "cuboidfit/io.hpp"
#include "cuboidfit/matching.hpp"
#include "cuboidfit/solver.hpp"
#include "cuboidfit/svg.hpp"

namespace cuboidfit {

inline std::string truth_path_for(const std::string& dataset_path) {
  return dataset_path + ".truth.jsonl";
}
inline std::string matches_path_for(const std::string& dataset_path) {
  return dataset_path + ".matches.jsonl";
}
inline std::string results_path_for(const std::string& dataset_path) {
  return dataset_path + ".results.jsonl";
}

// synth

inline void run_synth(const SynthConfig& cfg, const std::string& out_path,
                      const std::string& truth_path) {
  const SynthDataset data = generate(cfg);
  write_frames(data.frames, out_path);
  write_truth(data.truth, truth_path);
}

// match

struct CameraMatch {
  std::string frame_id, camera;
  MatchResult result;
  std::vector<std::string> object_ids;  // proposal index -> object id
  std::vector<std::string> gt_sources;  // gt index -> object that carried it
};

/// Pools every 2D box per camera, re-associates them to the objects by
/// IoU-gated Hungarian matching, and rewrites gt_box2d from the result.
inline std::vector<Frame> match_dataset(const std::vector<Frame>& frames, double threshold,
                                        std::vector<CameraMatch>* records = nullptr) {
  std::vector<Frame> out = frames;
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const Frame& f = frames[fi];
    for (const auto& cam : f.cameras) {
      CameraMatch rec{f.frame_id, cam.name, {}, {}, {}};
      std::vector<Box2D> pool;
      std::vector<Box3D> proposals;
      for (const auto& o : f.objects) {
        proposals.push_back(o.box3d);
        rec.object_ids.push_back(o.object_id);
        const auto it = o.gt_box2d.find(cam.name);
        if (it != o.gt_box2d.end()) {
          pool.push_back(it->second);
          rec.gt_sources.push_back(o.object_id);
        }
      }
      if (pool.empty()) continue;
      rec.result = match_frame(proposals, cam, pool, threshold);
      for (auto& o : out[fi].objects) o.gt_box2d.erase(cam.name);
      for (const auto& p : rec.result.pairs) {
        out[fi].objects[static_cast<std::size_t>(p.proposal)].gt_box2d[cam.name] =
            pool[static_cast<std::size_t>(p.gt)];
      }
      if (records) records->push_back(std::move(rec));
    }
  }
  return out;
}

inline Json to_json(const CameraMatch& m) {
  Json pairs = Json::array();
  for (const auto& p : m.result.pairs) {
    pairs.push_back(Json{{"object_id", m.object_ids[static_cast<std::size_t>(p.proposal)]},
                         {"gt_index", p.gt},
                         {"gt_source", m.gt_sources[static_cast<std::size_t>(p.gt)]},
                         {"iou", p.iou}});
  }
  Json un_obj = Json::array();
  for (int i : m.result.unmatched_proposals) {
    un_obj.push_back(m.object_ids[static_cast<std::size_t>(i)]);
  }
  return Json{{"frame_id", m.frame_id},
              {"camera", m.camera},
              {"threshold", m.result.threshold},
              {"pairs", pairs},
              {"unmatched_objects", un_obj},
              {"unmatched_gt", m.result.unmatched_gt}};
}

inline void run_match(const std::string& in_path, const std::string& out_path, double threshold,
                      const std::string& matches_path) {
  std::vector<CameraMatch> records;
  write_frames(match_dataset(read_frames(in_path), threshold, &records), out_path);
  std::string text;
  for (const auto& r : records) text += to_json(r).dump() + "\n";
  io_detail::write_text(matches_path, text);
}

// refine

struct RefineOptions {
  SolverConfig solver;
  double huber_delta = 1.0;
  double threshold = 0.3;  // minimum initial IoU for a target to be used
  int jobs = 1;
};

struct ObjectRefinement {
  std::string frame_id, object_id, camera;
  std::string status;  // refined | no_target | below_threshold | failed:<code>
  RefineResult result;
};

namespace pipeline_detail {

template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace pipeline_detail

/// Refines every object that carries a 2D target, using the first camera
/// (in frame camera order) that has one. Objects without a usable target
/// pass through untouched. Results come back sorted by (frame_id, object_id).
inline std::vector<Frame> refine_dataset(const std::vector<Frame>& frames, const RefineOptions& opt,
                                         std::vector<ObjectRefinement>* results = nullptr) {
  validate(opt.solver);
  struct Task {
    std::size_t frame, object;
  };
  std::vector<Task> tasks;
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    for (std::size_t oi = 0; oi < frames[fi].objects.size(); ++oi) tasks.push_back({fi, oi});
  }
  std::vector<ObjectRefinement> done(tasks.size());
  pipeline_detail::parallel_for(tasks.size(), opt.jobs, [&](std::size_t t) {
    const Frame& f = frames[tasks[t].frame];
    const ObjectRecord& o = f.objects[tasks[t].object];
    ObjectRefinement& r = done[t];
    r.frame_id = f.frame_id;
    r.object_id = o.object_id;
    r.status = "no_target";
    r.result.refined_box = o.box3d;
    const CameraModel* cam = nullptr;
    const Box2D* target = nullptr;
    for (const auto& c : f.cameras) {
      const auto it = o.gt_box2d.find(c.name);
      if (it != o.gt_box2d.end()) {
        cam = &c;
        target = &it->second;
        break;
      }
    }
    if (!cam) return;
    r.camera = cam->name;
    const double initial = projected_iou(*cam, o.box3d, *target);
    if (initial < opt.threshold) {
      r.status = "below_threshold";
      r.result.iou_before = r.result.iou_after = initial;
      return;
    }
    try {
      r.result = refine_box(o.box3d, *cam, *target, opt.solver, opt.huber_delta);
      r.status = "refined";
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidArgument) throw;
      r.status = std::string("failed:") + to_string(e.code());
      r.result.iou_before = r.result.iou_after = initial;
    }
  });

  std::vector<Frame> out = frames;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (done[t].status == "refined") {
      out[tasks[t].frame].objects[tasks[t].object].box3d = done[t].result.refined_box;
    }
  }
  if (results) {
    std::sort(done.begin(), done.end(), [](const ObjectRefinement& a, const ObjectRefinement& b) {
      return std::tie(a.frame_id, a.object_id) < std::tie(b.frame_id, b.object_id);
    });
    *results = std::move(done);
  }
  return out;
}

inline Json to_json(const ObjectRefinement& r) {
  const bool solved = r.status == "refined";
  return Json{{"frame_id", r.frame_id},
              {"object_id", r.object_id},
              {"camera", r.camera.empty() ? Json() : Json(r.camera)},
              {"status", r.status},
              {"params", solved ? to_json(r.result.params) : Json()},
              {"iou_before", r.result.iou_before},
              {"iou_after", r.result.iou_after},
              {"objective_value", solved ? Json(r.result.objective_value) : Json()},
              {"iterations", r.result.iterations},
              {"converged", r.result.converged},
              {"box3d", to_json(r.result.refined_box)}};
}

inline void run_refine(const std::string& in_path, const std::string& out_path,
                       const std::string& results_path, const RefineOptions& opt) {
  std::vector<ObjectRefinement> results;
  write_frames(refine_dataset(read_frames(in_path), opt, &results), out_path);
  std::string text;
  for (const auto& r : results) text += to_json(r).dump() + "\n";
  io_detail::write_text(results_path, text);
}

// eval

/// Targets come from the truth sidecar when `truth_path` is set, otherwise
/// from the gt_box2d fields of the before set. Returns the text table.
inline std::string run_eval(const std::string& before_path, const std::string& after_path,
                            const std::string& truth_path, const std::string& report_path) {
  const auto before = read_frames(before_path);
  const auto after = read_frames(after_path);
  const auto targets =
      truth_path.empty() ? targets_from_frames(before) : targets_from_truth(read_truth(truth_path));
  const EvalReport report = evaluate(before, after, targets);
  if (!report_path.empty()) io_detail::write_text(report_path, report_to_json(report).dump(2) + "\n");
  return format_table(report);
}

// render

inline void run_render(const std::string& in_path, const std::string& frame_id,
                       const std::string& camera, const std::string& svg_path,
                       const std::string& after_path) {
  const auto frames = read_frames(in_path);
  const auto it = std::find_if(frames.begin(), frames.end(),
                               [&](const Frame& f) { return f.frame_id == frame_id; });
  if (it == frames.end()) throw Error(ErrorCode::UnknownFrame, "no frame '" + frame_id + "'");
  std::vector<Box3D> before, after;
  for (const auto& o : it->objects) before.push_back(o.box3d);
  if (!after_path.empty()) {
    const auto refined = read_frames(after_path);
    const auto rf = std::find_if(refined.begin(), refined.end(),
                                 [&](const Frame& f) { return f.frame_id == frame_id; });
    if (rf == refined.end()) {
      throw Error(ErrorCode::UnknownFrame, "no frame '" + frame_id + "' in " + after_path);
    }
    for (const auto& o : it->objects) {
      const ObjectRecord* r = rf->find_object(o.object_id);
      if (!r) throw Error(ErrorCode::InvalidArgument, "object '" + o.object_id + "' not in the refined set");
      after.push_back(r->box3d);
    }
  }
  io_detail::write_text(svg_path, render_svg(*it, camera, before, after));
}

}  // namespace cuboidfit
