// kneeseg: batch evaluation, detection, anomaly maps, phantoms, augmentation
// and multi-model statistics.
//
// Exit codes: 0 success, 1 batch-level failure, 2 invalid arguments.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kneeseg/batch/commands.hpp"

namespace kb = kneeseg::batch;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::optional<std::string> manifest;
  std::optional<std::string> config;
  std::string out_dir = ".";
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> size_thresholds;
  std::optional<std::vector<double>> prob_thresholds;
  std::optional<int> connectivity;
  bool no_postprocess = false;

  std::optional<std::string> image, recon, labels;
  std::optional<std::size_t> cases;
  int num_classes = 10;
  std::vector<std::string> inputs;
};

kb::RunConfig build_config(const Options& o) {
  kb::RunConfig c = o.config ? kb::load_config(*o.config) : kb::RunConfig{};
  if (o.seed) {
    c.phantom.seed = *o.seed;
    c.prediction.seed = *o.seed;
    c.augment.seed = *o.seed;
  }
  if (o.size_thresholds) c.size_thresholds = *o.size_thresholds;
  if (o.prob_thresholds) c.prob_thresholds = *o.prob_thresholds;
  if (o.connectivity) {
    c.detection_connectivity = kneeseg::connectivity_from_int(*o.connectivity);
    c.postprocess_connectivity = c.detection_connectivity;
  }
  if (o.no_postprocess) c.postprocess = false;
  if (o.cases) c.phantom_cases = *o.cases;
  return c;
}

kb::Manifest require_manifest(const Options& o) {
  if (!o.manifest) throw CLI::RequiredError("--manifest");
  return kb::load_manifest(*o.manifest);
}

int cmd_eval(const Options& o) {
  const kb::Manifest mf = require_manifest(o);
  const kb::RunConfig cfg = build_config(o);
  const kb::EvalReport rep = kb::run_eval(mf, cfg, o.jobs);
  fs::create_directories(o.out_dir);
  kb::write_text(fs::path(o.out_dir) / "eval.json", rep.json_text);
  kb::write_text(fs::path(o.out_dir) / "summary.csv", rep.summary_csv);
  kb::write_text(fs::path(o.out_dir) / "per_case.csv", rep.per_case_csv);
  std::cerr << "eval: " << rep.total_rows - rep.failed_rows << "/" << rep.total_rows << " case rows ok\n";
  return rep.total_rows > 0 && rep.failed_rows == rep.total_rows ? 1 : 0;
}

int cmd_detect(const Options& o) {
  const kb::Manifest mf = require_manifest(o);
  const kb::RunConfig cfg = build_config(o);
  const kb::DetectReport rep = kb::run_detect(mf, cfg, o.jobs);
  fs::create_directories(o.out_dir);
  kb::write_text(fs::path(o.out_dir) / "detect.json", rep.json_text);
  return rep.ok ? 0 : 1;
}

int cmd_anomaly(const Options& o) {
  if (!o.image) throw CLI::RequiredError("--image");
  if (!o.recon && !o.labels) throw CLI::ValidationError("anomaly", "need --recon or --labels");
  kb::AnomalyInputs in;
  in.image = *o.image;
  if (o.recon) in.reconstruction = fs::path(*o.recon);
  if (o.labels) in.labels = fs::path(*o.labels);
  in.num_classes = o.num_classes;
  kb::run_anomaly(in, build_config(o), o.out_dir);
  return 0;
}

int cmd_phantom(const Options& o) {
  kb::run_phantom(build_config(o), o.out_dir);
  return 0;
}

int cmd_augment(const Options& o) {
  if (!o.image) throw CLI::RequiredError("--image");
  if (!o.labels) throw CLI::RequiredError("--labels");
  kb::run_augment(*o.image, *o.labels, o.num_classes, build_config(o), o.out_dir);
  return 0;
}

int cmd_stats(const Options& o) {
  if (o.inputs.empty()) throw CLI::ValidationError("stats", "need at least one CSV input");
  std::vector<kb::StatsInput> inputs;
  for (const auto& s : o.inputs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      inputs.push_back({std::nullopt, s});
    else
      inputs.push_back({s.substr(0, eq), s.substr(eq + 1)});
  }
  const kb::RunConfig cfg = build_config(o);
  const std::string text = kb::run_stats(inputs, cfg.significance_alpha);
  fs::create_directories(o.out_dir);
  kb::write_text(fs::path(o.out_dir) / "stats.json", text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kneeseg: anomaly-aware knee segmentation evaluation toolkit"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "run configuration (JSON)")->check(CLI::ExistingFile);
    s->add_option("--out-dir", o.out_dir, "output directory");
    s->add_option("--jobs", o.jobs, "worker threads")->check(CLI::Range(1u, 1024u));
    s->add_option("--seed", o.seed, "seed for phantoms, predictions and augmentation");
  };
  auto manifest_opts = [&](CLI::App* s) {
    s->add_option("--manifest", o.manifest, "case manifest (JSON)")->required()->check(CLI::ExistingFile);
    s->add_option("--connectivity", o.connectivity, "component connectivity")->check(CLI::IsMember({6, 18, 26}));
  };

  auto* eval = app.add_subcommand("eval", "segmentation metrics per case, class and model");
  common(eval);
  manifest_opts(eval);
  eval->add_flag("--no-postprocess", o.no_postprocess, "skip largest-component filtering");

  auto* detect = app.add_subcommand("detect", "bone-wise lesion detection and ROC");
  common(detect);
  manifest_opts(detect);
  detect->add_option("--size-thresholds", o.size_thresholds, "size thresholds in mm^3")->delimiter(',');
  detect->add_option("--prob-thresholds", o.prob_thresholds, "probability thresholds")->delimiter(',');

  auto* anomaly = app.add_subcommand("anomaly", "reconstruction error, focal weights and masked input");
  common(anomaly);
  anomaly->add_option("--image", o.image, "input image")->required()->check(CLI::ExistingFile);
  anomaly->add_option("--recon", o.recon, "reconstruction")->check(CLI::ExistingFile);
  anomaly->add_option("--labels", o.labels, "label map")->check(CLI::ExistingFile);
  anomaly->add_option("--num-classes", o.num_classes, "label classes")->check(CLI::Range(2, 256));

  auto* phantom = app.add_subcommand("phantom", "synthetic knee phantoms with a manifest");
  common(phantom);
  phantom->add_option("--cases", o.cases, "number of phantoms")->check(CLI::PositiveNumber);

  auto* augment = app.add_subcommand("augment", "random affine augmentation of an image/label pair");
  common(augment);
  augment->add_option("--image", o.image, "input image")->required()->check(CLI::ExistingFile);
  augment->add_option("--labels", o.labels, "label map")->required()->check(CLI::ExistingFile);
  augment->add_option("--num-classes", o.num_classes, "label classes")->check(CLI::Range(2, 256));

  auto* stats = app.add_subcommand("stats", "Tukey HSD across models from per-case CSVs");
  common(stats);
  stats->add_option("inputs", o.inputs, "per-case CSVs, optionally name=path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*eval) return cmd_eval(o);
    if (*detect) return cmd_detect(o);
    if (*anomaly) return cmd_anomaly(o);
    if (*phantom) return cmd_phantom(o);
    if (*augment) return cmd_augment(o);
    if (*stats) return cmd_stats(o);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
