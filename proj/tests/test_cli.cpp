#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "talkit/ensemble.hpp"
#include "talkit/io.hpp"
#include "talkit/localizer.hpp"
#include "talkit/simulator.hpp"

using namespace talkit;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CliResult run_cli(const std::string& args) {
  const std::string out_path = "cli_stdout.tmp";
  const std::string err_path = "cli_stderr.tmp";
  const std::string cmd = std::string("\"") + TALKIT_CLI_PATH + "\" " + args +
                          " >" + out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

const std::string kDir = "cli_scratch";

std::string where(const std::string& name) {
  fs::create_directories(kDir);
  return (fs::path(kDir) / name).string();
}

SimConfig demo_config() {
  SimConfig cfg;
  cfg.seed = 404;
  cfg.n_videos = 4;
  cfg.n_classes = 5;
  cfg.duration_min = 30.0;
  cfg.duration_max = 90.0;
  cfg.actions_per_minute = 5.0;
  cfg.action_min = 1.0;
  cfg.action_max = 6.0;
  cfg.interval = 0.5;
  cfg.n_models = 2;
  cfg.noise.flip_prob = 0.15;
  return cfg;
}

GroundTruth demo_gt() { return generate_ground_truth_serial(demo_config()); }

PredictionSet perfect_predictions(const GroundTruth& gt) {
  PredictionSet p;
  for (const auto& [id, video] : gt.videos) {
    auto& segs = p.videos[id];
    for (const Annotation& a : video.annotations)
      segs.push_back({a.label, a.start, a.end, 1.0});
  }
  canonicalize(p);
  return p;
}

// deterministic per-model submissions, written under the given prefix
std::vector<std::string> demo_model_files(const std::string& prefix) {
  const auto cfg = demo_config();
  const auto gt = demo_gt();
  std::vector<std::string> paths;
  for (int m = 0; m < cfg.n_models; ++m) {
    const auto streams = simulate_classifier_serial(
        gt, cfg.interval, cfg, model_seed(cfg.seed, m));
    const std::string path =
        where(prefix + "_model" + std::to_string(m) + ".csv");
    serialize_submission(localize_serial(streams), path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace

TEST_CASE("help and argument errors use the documented exit codes") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("--help").out.find("localize") != std::string::npos);
  CHECK(run_cli("").code == 2);           // a subcommand is required
  CHECK(run_cli("frobnicate").code == 2);  // unknown subcommand
  CHECK(run_cli("localize").code == 2);    // missing --streams
  CHECK(run_cli("eval --pred x.csv").code == 2);  // missing --gt
  CHECK(run_cli("eval --pred a --gt b --interpolation linear").code == 2);
}

TEST_CASE("localize matches the library byte for byte") {
  const auto cfg = demo_config();
  const auto gt = demo_gt();
  const auto streams =
      simulate_classifier_serial(gt, cfg.interval, cfg, model_seed(cfg.seed, 0));
  serialize_interval_streams(streams, where("streams.isv"));

  const auto r = run_cli("localize --streams " + where("streams.isv") +
                         " --out " + where("sub.csv"));
  CHECK(r.code == 0);
  CHECK(r.out.find("localized") != std::string::npos);
  CHECK(slurp(where("sub.csv")) ==
        submission_to_string(localize_serial(streams)));

  // job count must not change the bytes
  const auto r2 = run_cli("localize --streams " + where("streams.isv") +
                          " --jobs 3 --out " + where("sub_jobs.csv"));
  CHECK(r2.code == 0);
  CHECK(slurp(where("sub_jobs.csv")) == slurp(where("sub.csv")));

  MergeOptions bridged;
  bridged.bridge_gaps = true;
  bridged.mean_confidence = true;
  const auto r3 = run_cli("localize --streams " + where("streams.isv") +
                          " --bridge-gaps --mean-confidence --out " +
                          where("sub_opts.csv"));
  CHECK(r3.code == 0);
  CHECK(slurp(where("sub_opts.csv")) ==
        submission_to_string(localize_serial(streams, bridged)));
}

TEST_CASE("broken inputs exit 1 with a diagnostic") {
  write_text_file(where("bad.isv"),
                  "clip_a,0.500,2.500,2\n0,0.700000\n0,0.900000\n");
  const auto r = run_cli("localize --streams " + where("bad.isv") +
                         " --out " + where("nope.csv"));
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("records") != std::string::npos);
  CHECK_FALSE(fs::exists(where("nope.csv")));

  const auto missing = run_cli("eval --pred missing.csv --gt missing.csv");
  CHECK(missing.code == 1);
  CHECK(missing.err.find("error:") != std::string::npos);
}

TEST_CASE("a perfect submission scores a clean 1.0 through the CLI") {
  const auto cfg = demo_config();
  const auto gt = demo_gt();
  serialize_ground_truth(gt, where("gt.csv"));
  serialize_ground_truth_json(gt, where("gt.json"), cfg.n_classes);
  serialize_submission(perfect_predictions(gt), where("perfect.csv"));

  const auto r = run_cli("eval --pred " + where("perfect.csv") + " --gt " +
                         where("gt.csv") + " --classes 5 --report " +
                         where("report.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("final_score 1.000000") != std::string::npos);
  CHECK(r.out.find("AP@0.95") != std::string::npos);

  const auto report = nlohmann::json::parse(slurp(where("report.json")));
  CHECK(report["final_score"] == 1.0);
  CHECK(report["n_classes"] == 5);

  // json ground truth carries the class count, no --classes needed
  const auto rj = run_cli("eval --pred " + where("perfect.csv") + " --gt " +
                          where("gt.json"));
  CHECK(rj.code == 0);
  CHECK(rj.out.find("final_score 1.000000") != std::string::npos);

  const auto all = run_cli("eval --pred " + where("perfect.csv") + " --gt " +
                           where("gt.json") +
                           " --thresholds 0.3,0.6 --interpolation all");
  CHECK(all.code == 0);
  CHECK(all.out.find("AP@0.30") != std::string::npos);
  CHECK(all.out.find("final_score 1.000000") != std::string::npos);
}

TEST_CASE("validate agrees with eval about what is well-formed") {
  const auto gt = demo_gt();
  serialize_ground_truth_json(gt, where("v_gt.json"), 5);
  serialize_submission(perfect_predictions(gt), where("v_perfect.csv"));

  const auto ok = run_cli("validate --pred " + where("v_perfect.csv"));
  CHECK(ok.code == 0);
  CHECK(ok.out.find(": OK (") != std::string::npos);

  const auto gt_ok = run_cli("validate --gt " + where("v_gt.json"));
  CHECK(gt_ok.code == 0);
  CHECK(gt_ok.out.find("annotation(s)") != std::string::npos);

  write_text_file(where("shifty.csv"),
                  "clip,0,1.000,2.000,0.500000\n"
                  "clip,9,3.000,4.000,0.500000\n");
  CHECK(run_cli("validate --pred " + where("shifty.csv")).code == 0);
  const auto bad = run_cli("validate --pred " + where("shifty.csv") +
                           " --classes 5");
  CHECK(bad.code == 1);
  CHECK(bad.err.find("label id out of range") != std::string::npos);

  CHECK(run_cli("validate").code == 2);
}

TEST_CASE("simulate writes a reproducible corpus") {
  write_text_file(where("sim.json"), sim_config_to_json(demo_config()));

  const auto a = run_cli("simulate --config " + where("sim.json") +
                         " --out-dir " + where("run_a"));
  REQUIRE(a.code == 0);
  CHECK(a.out.find("wrote") != std::string::npos);
  const auto b = run_cli("simulate --config " + where("sim.json") +
                         " --out-dir " + where("run_b"));
  REQUIRE(b.code == 0);

  for (const std::string name :
       {"config.json", "gt.csv", "gt.json", "streams_model0.isv",
        "streams_model1.isv"}) {
    CAPTURE(name);
    const auto bytes = slurp(where("run_a/" + name));
    CHECK_FALSE(bytes.empty());
    CHECK(bytes == slurp(where("run_b/" + name)));
  }

  const auto c = run_cli("simulate --config " + where("sim.json") +
                         " --seed 999 --out-dir " + where("run_c"));
  REQUIRE(c.code == 0);
  CHECK_FALSE(slurp(where("run_c/gt.csv")) == slurp(where("run_a/gt.csv")));

  // the generated corpus survives its own validators and scores end to end
  const auto full = run_cli(
      "localize --streams " + where("run_a/streams_model0.isv") + " --out " +
      where("run_a/model0.csv"));
  REQUIRE(full.code == 0);
  const auto eval = run_cli("eval --pred " + where("run_a/model0.csv") +
                            " --gt " + where("run_a/gt.json"));
  CHECK(eval.code == 0);
  CHECK(eval.out.find("final_score") != std::string::npos);
}

TEST_CASE("ensemble command reproduces the library pipeline") {
  const auto model_files = demo_model_files("ens");
  REQUIRE(model_files.size() == 2);

  nlohmann::json cfg;
  cfg["threshold"] = 0.6;
  cfg["models"] = {{{"path", "ens_model0.csv"}, {"weight", 1.0}},
                   {{"path", "ens_model1.csv"}, {"weight", 0.8}}};
  write_text_file(where("ensemble.json"), cfg.dump(2) + "\n");

  const auto r = run_cli("ensemble --config " + where("ensemble.json") +
                         " --out " + where("fused.csv"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("candidates") != std::string::npos);

  std::vector<WeightedModel> models(2);
  models[0].model_id = "m0";
  models[0].weight = 1.0;
  models[0].predictions = parse_submission(model_files[0]);
  models[1].model_id = "m1";
  models[1].weight = 0.8;
  models[1].predictions = parse_submission(model_files[1]);
  EnsembleOptions opts;
  opts.merge_threshold = 0.6;
  CHECK(slurp(where("fused.csv")) ==
        submission_to_string(ensemble_pipeline_serial(models, opts)));

  // one model in, the same model out
  nlohmann::json solo;
  solo["threshold"] = 0.5;
  solo["models"] = {{{"path", "ens_model0.csv"}, {"weight", 1.0}}};
  write_text_file(where("solo.json"), solo.dump(2) + "\n");
  const auto rs = run_cli("ensemble --config " + where("solo.json") +
                          " --out " + where("solo.csv"));
  REQUIRE(rs.code == 0);
  CHECK(slurp(where("solo.csv")) == slurp(model_files[0]));

  nlohmann::json warn = solo;
  warn.erase("threshold");
  write_text_file(where("warn.json"), warn.dump(2) + "\n");
  const auto rw = run_cli("ensemble --config " + where("warn.json") +
                          " --out " + where("warned.csv"));
  CHECK(rw.code == 0);
  CHECK(rw.err.find("defaulting to 0.5") != std::string::npos);
}

TEST_CASE("sweep command writes the grid deterministically") {
  SweepConfig sw;
  sw.base = demo_config();
  sw.base.n_videos = 2;
  sw.base.duration_max = 45.0;
  nlohmann::json j;
  j["sim"] = nlohmann::json::parse(sim_config_to_json(sw.base));
  j["intervals"] = {1.0, 0.5};
  j["noise_levels"] = {0.0, 0.2};
  j["ensemble_sizes"] = {1, 2};
  j["repeats"] = 1;
  write_text_file(where("sweep.json"), j.dump(2) + "\n");

  const auto a = run_cli("sweep --config " + where("sweep.json") + " --out " +
                         where("sweep_a.csv"));
  REQUIRE(a.code == 0);
  CHECK(a.out.find("final_score") != std::string::npos);
  CHECK(a.err.find("wrote") != std::string::npos);

  const auto b = run_cli("sweep --config " + where("sweep.json") + " --out " +
                         where("sweep_b.csv"));
  REQUIRE(b.code == 0);

  const auto csv = slurp(where("sweep_a.csv"));
  CHECK(csv.rfind("interval,noise,ensemble_size,repeat,final_score,"
                  "best_single\n", 0) == 0);
  CHECK(csv == slurp(where("sweep_b.csv")));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2 * 2);
}
