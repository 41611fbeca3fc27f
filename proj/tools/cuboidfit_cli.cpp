// cuboidfit: synthesize, match, refine, evaluate and render cuboid datasets.
//
//   cuboidfit synth  --config cfg.json --out data.jsonl
//   cuboidfit match  --in data.jsonl --out matched.jsonl
//   cuboidfit refine --in matched.jsonl --out refined.jsonl
//   cuboidfit eval   --before matched.jsonl --after refined.jsonl --truth data.jsonl.truth.jsonl
//   cuboidfit render --in data.jsonl --frame frame_0000 --camera front --out f.svg
//
// Exit codes: 0 success, 1 runtime error, 2 usage or config error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cuboidfit/cuboidfit.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<double, double> parse_bounds(const std::string& s) {
  std::istringstream in(s);
  double lo = 0, hi = 0;
  char comma = 0;
  if (!(in >> lo >> comma >> hi) || comma != ',' || !in.eof()) {
    throw UsageError("--bounds: expected LO,HI, got '" + s + "'");
  }
  if (!(0 <= lo && lo < 1 && 1 < hi && hi <= 2)) {
    throw UsageError("--bounds: need 0 <= LO < 1 < HI <= 2");
  }
  return {lo, hi};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refine lidar boxes into image-tight cuboids"};
  app.require_subcommand(1);

  int jobs = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("--jobs", jobs, "Worker threads for refinement (0 = all cores)")
      ->capture_default_str();
  app.add_option("--seed", seed, "Overrides the synth config seed");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with planted truth");
  std::string synth_config, synth_out, synth_truth;
  synth->add_option("--config", synth_config, "JSON synth config (defaults if omitted)");
  synth->add_option("--out", synth_out, "Dataset JSONL path")->required();
  synth->add_option("--truth", synth_truth, "Truth sidecar path (default <out>.truth.jsonl)");

  auto* match = app.add_subcommand("match", "Associate 2D boxes to 3D boxes per camera");
  std::string match_in, match_out, match_records;
  double match_threshold = 0.3;
  match->add_option("--in", match_in, "Input dataset")->required();
  match->add_option("--out", match_out, "Output dataset")->required();
  match->add_option("--matches", match_records, "Match records (default <out>.matches.jsonl)");
  match->add_option("--threshold", match_threshold, "Minimum IoU of a kept match")
      ->capture_default_str();

  auto* refine = app.add_subcommand("refine", "Solve anchor-edge scales against 2D targets");
  std::string refine_in, refine_out, refine_results, bounds = "0,2";
  cuboidfit::RefineOptions ropt;
  refine->add_option("--in", refine_in, "Input dataset")->required();
  refine->add_option("--out", refine_out, "Refined dataset")->required();
  refine->add_option("--results", refine_results, "Per-box results (default <out>.results.jsonl)");
  refine->add_option("--max-iter", ropt.solver.max_iter, "Nelder-Mead iteration budget")
      ->capture_default_str();
  refine->add_option("--bounds", bounds, "Parameter bounds LO,HI")->capture_default_str();
  refine->add_option("--huber-delta", ropt.huber_delta, "Huber transition, pixels")
      ->capture_default_str();
  refine->add_option("--threshold", ropt.threshold, "Minimum initial IoU to use a target")
      ->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Before/after IoU and recall table");
  std::string eval_before, eval_after, eval_truth, eval_report;
  eval->add_option("--before", eval_before, "Dataset before refinement")->required();
  eval->add_option("--after", eval_after, "Dataset after refinement")->required();
  eval->add_option("--truth", eval_truth, "Truth sidecar (default: gt_box2d of --before)");
  eval->add_option("--report", eval_report, "Machine-readable report path");

  auto* render = app.add_subcommand("render", "SVG overlay of one frame in one camera");
  std::string render_in, render_frame, render_camera, render_out, render_after;
  render->add_option("--in", render_in, "Dataset")->required();
  render->add_option("--frame", render_frame, "Frame id")->required();
  render->add_option("--camera", render_camera, "Camera name")->required();
  render->add_option("--out", render_out, "SVG path")->required();
  render->add_option("--after", render_after, "Refined dataset to overlay in green");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) {
      cuboidfit::SynthConfig cfg;
      try {
        cfg = synth_config.empty() ? cuboidfit::SynthConfig{}
                                   : cuboidfit::read_synth_config(synth_config);
        if (seed) cfg.seed = *seed;
        cuboidfit::validate(cfg);
      } catch (const cuboidfit::Error& e) {
        throw UsageError(e.what());
      }
      cuboidfit::run_synth(cfg, synth_out,
                           synth_truth.empty() ? cuboidfit::truth_path_for(synth_out) : synth_truth);
    } else if (*match) {
      if (!(match_threshold >= 0 && match_threshold <= 1)) {
        throw UsageError("--threshold must lie in [0, 1]");
      }
      cuboidfit::run_match(match_in, match_out, match_threshold,
                           match_records.empty() ? cuboidfit::matches_path_for(match_out)
                                                 : match_records);
    } else if (*refine) {
      std::tie(ropt.solver.lower_bound, ropt.solver.upper_bound) = parse_bounds(bounds);
      if (ropt.solver.max_iter < 1) throw UsageError("--max-iter must be >= 1");
      if (!(ropt.huber_delta > 0)) throw UsageError("--huber-delta must be > 0");
      ropt.jobs = jobs;
      cuboidfit::run_refine(refine_in, refine_out,
                            refine_results.empty() ? cuboidfit::results_path_for(refine_out)
                                                   : refine_results,
                            ropt);
    } else if (*eval) {
      std::cout << cuboidfit::run_eval(eval_before, eval_after, eval_truth, eval_report);
    } else if (*render) {
      cuboidfit::run_render(render_in, render_frame, render_camera, render_out, render_after);
    }
  } catch (const UsageError& e) {
    std::cerr << "cuboidfit: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "cuboidfit: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
