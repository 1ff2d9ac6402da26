#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "talkit/ensemble.hpp"
#include "talkit/evaluation.hpp"
#include "talkit/localizer.hpp"
#include "talkit/parallel.hpp"
#include "talkit/simulator.hpp"

// Times each parallel kernel against its serial reference and verifies the
// results are identical. Exits nonzero on any mismatch.

namespace {

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

bool g_all_match = true;

void row(const char* name, double serial_ms, double parallel_ms,
         bool match) {
  std::printf("%-22s %10.1f %12.1f %8.2fx  %s\n", name, serial_ms,
              parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
              match ? "identical" : "MISMATCH");
  g_all_match = g_all_match && match;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"talkit-bench: serial reference vs parallel kernels"};
  int jobs = 0;
  double scale = 1.0;
  app.add_option("--jobs", jobs, "worker threads (0 = all cores)");
  app.add_option("--scale", scale, "workload multiplier");
  CLI11_PARSE(app, argc, argv);

  talkit::SimConfig cfg;
  cfg.seed = 7;
  cfg.n_videos = static_cast<int>(16 * scale);
  cfg.n_classes = 12;
  cfg.duration_min = 180.0;
  cfg.duration_max = 360.0;
  cfg.actions_per_minute = 8.0;
  cfg.action_min = 1.0;
  cfg.action_max = 6.0;
  cfg.interval = 0.25;
  cfg.noise.flip_prob = 0.1;

  std::printf("jobs = %d (resolved %d), scale = %.2f, %d videos\n", jobs,
              talkit::resolve_jobs(jobs), scale, cfg.n_videos);
  std::printf("%-22s %10s %12s %9s\n", "kernel", "serial/ms", "parallel/ms",
              "speedup");

  talkit::GroundTruth gt_s, gt_p;
  const double t_gt_s =
      time_ms([&] { gt_s = talkit::generate_ground_truth_serial(cfg); });
  const double t_gt_p =
      time_ms([&] { gt_p = talkit::generate_ground_truth(cfg, jobs); });
  row("generate_ground_truth", t_gt_s, t_gt_p, gt_s == gt_p);

  const int n_models = 3;
  std::vector<std::vector<talkit::IntervalStream>> streams_s(n_models),
      streams_p(n_models);
  const double t_sim_s = time_ms([&] {
    for (int m = 0; m < n_models; ++m)
      streams_s[m] = talkit::simulate_classifier_serial(
          gt_s, cfg.interval, cfg, talkit::model_seed(cfg.seed, m));
  });
  const double t_sim_p = time_ms([&] {
    for (int m = 0; m < n_models; ++m)
      streams_p[m] = talkit::simulate_classifier(
          gt_s, cfg.interval, cfg, talkit::model_seed(cfg.seed, m), jobs);
  });
  row("simulate_classifier", t_sim_s, t_sim_p, streams_s == streams_p);

  std::vector<talkit::WeightedModel> models_s, models_p;
  const double t_loc_s = time_ms([&] {
    for (int m = 0; m < n_models; ++m)
      models_s.push_back({"m" + std::to_string(m), 1.0 + 0.1 * m,
                          talkit::localize_serial(streams_s[m])});
  });
  const double t_loc_p = time_ms([&] {
    for (int m = 0; m < n_models; ++m)
      models_p.push_back({"m" + std::to_string(m), 1.0 + 0.1 * m,
                          talkit::localize(streams_s[m], {}, jobs)});
  });
  bool loc_match = true;
  for (int m = 0; m < n_models; ++m)
    loc_match = loc_match &&
                models_s[static_cast<std::size_t>(m)].predictions ==
                    models_p[static_cast<std::size_t>(m)].predictions;
  row("localize", t_loc_s, t_loc_p, loc_match);

  talkit::PredictionSet fused_s, fused_p;
  const double t_ens_s = time_ms(
      [&] { fused_s = talkit::ensemble_pipeline_serial(models_s); });
  const double t_ens_p = time_ms([&] {
    fused_p = talkit::ensemble_pipeline(models_s, {}, nullptr, jobs);
  });
  row("ensemble_pipeline", t_ens_s, t_ens_p, fused_s == fused_p);

  talkit::EvalConfig eval_cfg;
  eval_cfg.n_classes = cfg.n_classes;
  talkit::EvalReport rep_s, rep_p;
  const double t_ev_s =
      time_ms([&] { rep_s = talkit::evaluate_serial(fused_s, gt_s, eval_cfg); });
  const double t_ev_p =
      time_ms([&] { rep_p = talkit::evaluate(fused_s, gt_s, eval_cfg, jobs); });
  const bool ev_match = rep_s.ap == rep_p.ap &&
                        rep_s.map_per_threshold == rep_p.map_per_threshold &&
                        rep_s.final_score == rep_p.final_score;
  row("evaluate", t_ev_s, t_ev_p, ev_match);

  std::printf("final_score %.6f\n", rep_s.final_score);
  return g_all_match ? 0 : 1;
}
