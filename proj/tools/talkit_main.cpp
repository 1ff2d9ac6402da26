#include <cstdint>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "talkit/ensemble.hpp"
#include "talkit/evaluation.hpp"
#include "talkit/io.hpp"
#include "talkit/localizer.hpp"
#include "talkit/segment.hpp"
#include "talkit/simulator.hpp"

// Exit codes: 0 success, 1 parse/validation/runtime failure, 2 usage error.
// Tables go to stdout, artifacts to files, diagnostics to stderr.

namespace {

int run_localize(const std::vector<std::string>& stream_paths,
                 const std::string& out, bool bridge_gaps,
                 bool mean_confidence, int jobs) {
  std::vector<talkit::IntervalStream> streams;
  for (const std::string& path : stream_paths) {
    auto part = talkit::parse_interval_streams(path);
    streams.insert(streams.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  const talkit::MergeOptions opts{bridge_gaps, mean_confidence};
  const talkit::PredictionSet preds = talkit::localize(streams, opts, jobs);
  talkit::serialize_submission(preds, out);
  std::cout << "localized " << streams.size() << " stream(s) into "
            << talkit::total_segments(preds) << " segment(s) across "
            << preds.videos.size() << " video(s): " << out << '\n';
  return 0;
}

int run_ensemble(const std::string& config_path, const std::string& out,
                 int jobs) {
  const talkit::EnsembleConfigFile cfg =
      talkit::parse_ensemble_config(config_path);
  if (cfg.threshold_defaulted)
    std::cerr << "warning: " << config_path
              << ": no merge threshold given, defaulting to 0.5\n";

  std::vector<talkit::WeightedModel> models;
  for (const talkit::EnsembleModelRef& ref : cfg.models) {
    talkit::WeightedModel m;
    m.model_id = ref.path;
    m.weight = ref.weight;
    m.predictions = talkit::parse_submission(ref.path);
    models.push_back(std::move(m));
  }

  talkit::EnsembleOptions opts;
  opts.merge_threshold = cfg.threshold;
  talkit::EnsembleStats stats;
  const talkit::PredictionSet fused =
      talkit::ensemble_pipeline(models, opts, &stats, jobs);
  talkit::serialize_submission(fused, out);

  for (const auto& m : stats.models)
    std::cout << "model " << m.model_id << ": " << m.segments
              << " segment(s)\n";
  std::cout << "candidates " << stats.candidates << " (shared "
            << stats.shared_candidates << "), merged pairs "
            << stats.merged_pairs << ", output segments "
            << stats.output_segments << ": " << out << '\n';
  return 0;
}

int infer_n_classes(const talkit::GroundTruth& gt) {
  int max_label = -1;
  for (const auto& [id, video] : gt.videos)
    for (const talkit::Annotation& a : video.annotations)
      max_label = std::max(max_label, a.label);
  return max_label + 1 > 1 ? max_label + 1 : 1;
}

int run_eval(const std::string& pred_path, const std::string& gt_path,
             int classes, const std::vector<double>& thresholds,
             const std::string& interpolation, bool lenient_videos,
             const std::string& report_path, const std::string& names_path,
             int jobs) {
  int file_classes = 0;
  const talkit::GroundTruth gt =
      talkit::parse_ground_truth(gt_path, &file_classes);
  const talkit::PredictionSet preds = talkit::parse_submission(pred_path);

  talkit::EvalConfig cfg;
  cfg.thresholds = thresholds;
  cfg.n_classes = classes > 0    ? classes
                  : file_classes > 0 ? file_classes
                                     : infer_n_classes(gt);
  cfg.interpolation = interpolation == "all"
                          ? talkit::Interpolation::kAllPoints
                          : talkit::Interpolation::kPoints101;
  cfg.strict_videos = !lenient_videos;

  const talkit::EvalReport report = talkit::evaluate(preds, gt, cfg, jobs);

  std::map<int, std::string> names;
  if (!names_path.empty()) names = talkit::parse_class_names(names_path);
  std::cout << talkit::format_eval_table(report, names);
  std::cout << "final_score " << talkit::format_score(report.final_score)
            << '\n';
  if (!report_path.empty()) talkit::write_eval_report(report, report_path);
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 bool seed_set, std::uint64_t seed, int jobs) {
  talkit::SimConfig cfg = talkit::parse_sim_config(config_path);
  if (seed_set) cfg.seed = seed;
  talkit::validate_sim_config(cfg);

  std::filesystem::create_directories(out_dir);
  const auto path = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  const talkit::GroundTruth gt = talkit::generate_ground_truth(cfg, jobs);
  talkit::write_text_file(path("config.json"),
                          talkit::sim_config_to_json(cfg));
  talkit::serialize_ground_truth(gt, path("gt.csv"));
  talkit::serialize_ground_truth_json(gt, path("gt.json"), cfg.n_classes);
  std::cout << "wrote " << path("gt.csv") << " (" << gt.videos.size()
            << " video(s), " << talkit::total_annotations(gt)
            << " annotation(s))\n";

  for (int m = 0; m < cfg.n_models; ++m) {
    const auto streams = talkit::simulate_classifier(
        gt, cfg.interval, cfg, talkit::model_seed(cfg.seed, m), jobs);
    const std::string name = "streams_model" + std::to_string(m) + ".isv";
    talkit::serialize_interval_streams(streams, path(name));
    std::cout << "wrote " << path(name) << " (" << streams.size()
              << " stream(s))\n";
  }
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& out,
              bool seed_set, std::uint64_t seed, int jobs) {
  talkit::SweepConfig cfg = talkit::parse_sweep_config(config_path);
  if (seed_set) cfg.base.seed = seed;
  const talkit::SweepTable table = talkit::sweep(cfg, jobs);
  std::cout << talkit::format_sweep_table(table);
  talkit::write_sweep_csv(table, out);
  std::cerr << "wrote " << out << " (" << table.rows.size() << " row(s))\n";
  return 0;
}

int run_validate(const std::string& pred_path, const std::string& gt_path,
                 int classes) {
  if (!pred_path.empty()) {
    const talkit::PredictionSet preds = talkit::parse_submission(pred_path);
    const auto violations = talkit::validate_prediction_set(preds, classes);
    if (!violations.empty()) {
      std::cerr << pred_path << ": "
                << talkit::violations_to_string(violations) << '\n';
      return 1;
    }
    std::cout << pred_path << ": OK (" << talkit::total_segments(preds)
              << " segment(s) across " << preds.videos.size()
              << " video(s))\n";
  } else {
    int file_classes = 0;
    const talkit::GroundTruth gt =
        talkit::parse_ground_truth(gt_path, &file_classes);
    const int n_classes = classes > 0 ? classes : file_classes;
    const auto violations = talkit::validate_ground_truth(gt, n_classes);
    if (!violations.empty()) {
      std::cerr << gt_path << ": " << talkit::violations_to_string(violations)
                << '\n';
      return 1;
    }
    std::cout << gt_path << ": OK (" << talkit::total_annotations(gt)
              << " annotation(s) across " << gt.videos.size()
              << " video(s))\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"talkit: fixed-interval temporal action localization toolkit"};
  app.require_subcommand(1);

  // localize
  auto* localize = app.add_subcommand(
      "localize", "merge interval streams into a submission file");
  std::vector<std::string> stream_paths;
  std::string localize_out = "submission.csv";
  bool bridge_gaps = false;
  bool mean_confidence = false;
  int localize_jobs = 0;
  localize->add_option("--streams", stream_paths, "interval stream file(s)")
      ->required();
  localize->add_option("--out", localize_out, "output submission path");
  localize->add_flag("--bridge-gaps", bridge_gaps,
                     "join runs split by a single background interval");
  localize->add_flag("--mean-confidence", mean_confidence,
                     "use the mean run confidence instead of the max");
  localize->add_option("--jobs", localize_jobs,
                       "worker threads (0 = all cores)");

  // ensemble
  auto* ensemble = app.add_subcommand(
      "ensemble", "fuse several submission files into one");
  std::string ensemble_config;
  std::string ensemble_out = "ensemble.csv";
  int ensemble_jobs = 0;
  ensemble->add_option("--config", ensemble_config, "ensemble config JSON")
      ->required();
  ensemble->add_option("--out", ensemble_out, "output submission path");
  ensemble->add_option("--jobs", ensemble_jobs,
                       "worker threads (0 = all cores)");

  // eval
  auto* eval = app.add_subcommand(
      "eval", "score a submission against ground truth");
  std::string eval_pred, eval_gt, eval_names;
  std::string eval_report = "eval_report.json";
  std::string eval_interp = "101";
  std::vector<double> eval_thresholds{0.5, 0.75, 0.95};
  int eval_classes = 0;
  bool lenient_videos = false;
  int eval_jobs = 0;
  eval->add_option("--pred", eval_pred, "submission file")->required();
  eval->add_option("--gt", eval_gt, "ground-truth file (flat or JSON)")
      ->required();
  eval->add_option("--classes", eval_classes,
                   "class count C (default: from the ground-truth file)");
  eval->add_option("--thresholds", eval_thresholds,
                   "IoU thresholds, strictly increasing")
      ->delimiter(',');
  eval->add_option("--interpolation", eval_interp,
                   "AP interpolation: 101 or all")
      ->check(CLI::IsMember({"101", "all"}));
  eval->add_flag("--lenient-videos", lenient_videos,
                 "drop predictions for unknown videos instead of failing");
  eval->add_option("--report", eval_report, "structured report path");
  eval->add_option("--names", eval_names, "class names file (id,name)");
  eval->add_option("--jobs", eval_jobs, "worker threads (0 = all cores)");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "generate synthetic ground truth and classifier streams");
  std::string sim_config, sim_out_dir = "sim_out";
  std::uint64_t sim_seed = 0;
  int sim_jobs = 0;
  simulate->add_option("--config", sim_config, "simulation config JSON")
      ->required();
  simulate->add_option("--out-dir", sim_out_dir, "output directory");
  auto* sim_seed_opt =
      simulate->add_option("--seed", sim_seed, "override the config seed");
  simulate->add_option("--jobs", sim_jobs, "worker threads (0 = all cores)");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "score the pipeline over an (interval, noise, ensemble) grid");
  std::string sweep_config, sweep_out = "sweep.csv";
  std::uint64_t sweep_seed = 0;
  int sweep_jobs = 0;
  sweep->add_option("--config", sweep_config, "sweep config JSON")
      ->required();
  sweep->add_option("--out", sweep_out, "output CSV path");
  auto* sweep_seed_opt =
      sweep->add_option("--seed", sweep_seed, "override the config seed");
  sweep->add_option("--jobs", sweep_jobs, "worker threads (0 = all cores)");

  // validate
  auto* validate = app.add_subcommand(
      "validate", "check a submission or ground-truth file");
  std::string validate_pred, validate_gt;
  int validate_classes = 0;
  auto* vp = validate->add_option("--pred", validate_pred, "submission file");
  auto* vg =
      validate->add_option("--gt", validate_gt, "ground-truth file");
  validate->add_option("--classes", validate_classes,
                       "class count for label range checks (0 = skip)");
  vp->excludes(vg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (localize->parsed())
      return run_localize(stream_paths, localize_out, bridge_gaps,
                          mean_confidence, localize_jobs);
    if (ensemble->parsed())
      return run_ensemble(ensemble_config, ensemble_out, ensemble_jobs);
    if (eval->parsed())
      return run_eval(eval_pred, eval_gt, eval_classes, eval_thresholds,
                      eval_interp, lenient_videos, eval_report, eval_names,
                      eval_jobs);
    if (simulate->parsed())
      return run_simulate(sim_config, sim_out_dir, sim_seed_opt->count() > 0,
                          sim_seed, sim_jobs);
    if (sweep->parsed())
      return run_sweep(sweep_config, sweep_out, sweep_seed_opt->count() > 0,
                       sweep_seed, sweep_jobs);
    if (validate->parsed()) {
      if (validate_pred.empty() && validate_gt.empty()) {
        std::cerr << "validate: one of --pred or --gt is required\n"
                  << validate->help();
        return 2;
      }
      return run_validate(validate_pred, validate_gt, validate_classes);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
