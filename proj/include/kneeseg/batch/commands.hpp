#ifndef KNEESEG_BATCH_COMMANDS_HPP
#define KNEESEG_BATCH_COMMANDS_HPP

// Batch commands behind the CLI. Each returns its report payloads as strings
// (or writes volumes into an output directory) so that reruns can be compared
// byte for byte. Reports carry no timestamps.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kneeseg/augment.hpp"
#include "kneeseg/batch/config.hpp"
#include "kneeseg/batch/manifest.hpp"
#include "kneeseg/batch/parallel.hpp"
#include "kneeseg/detection.hpp"
#include "kneeseg/intensity.hpp"
#include "kneeseg/losses.hpp"
#include "kneeseg/metaimage.hpp"
#include "kneeseg/metrics.hpp"
#include "kneeseg/phantom.hpp"
#include "kneeseg/tukey.hpp"

namespace kneeseg::batch {

inline constexpr const char* kToolVersion = "1.0.0";

inline json metadata(const char* command) {
  return json{{"tool", "kneeseg"}, {"version", kToolVersion}, {"command", command}};
}

inline std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

struct SampleStats {
  std::size_t n = 0;
  std::optional<double> mean;
  std::optional<double> stddev;  // sample (n - 1) standard deviation
};

inline SampleStats sample_stats(const std::vector<double>& v) {
  SampleStats s;
  s.n = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  const double m = sum / static_cast<double>(v.size());
  s.mean = m;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

inline json stats_json(const SampleStats& s) {
  return json{{"n", s.n}, {"mean", optional_number(s.mean)}, {"std", optional_number(s.stddev)}};
}

inline json tukey_json(const GroupComparison& g) {
  json groups = json::array();
  for (std::size_t i = 0; i < g.labels.size(); ++i)
    groups.push_back({{"name", g.labels[i]}, {"n", g.sizes[i]}, {"mean", g.means[i]}});
  json pairs = json::array();
  for (const auto& p : g.pairs)
    pairs.push_back({{"a", g.labels[p.first]},
                     {"b", g.labels[p.second]},
                     {"mean_difference", p.mean_difference},
                     {"q", optional_number(p.q)},
                     {"p_value", p.p_value},
                     {"significant", p.significant}});
  return json{{"groups", groups}, {"msw", g.msw}, {"df", g.df}, {"pairs", pairs}};
}

/// Tukey over named samples, or a "skipped" record when the data cannot
/// support the test.
inline json try_tukey(const std::vector<NamedSample>& groups, double alpha,
                      std::optional<GroupComparison>* out = nullptr) {
  if (groups.size() < 2) return json{{"skipped", "fewer than two groups"}};
  try {
    GroupComparison g = tukey_hsd(groups, alpha);
    json j = tukey_json(g);
    if (out) *out = std::move(g);
    return j;
  } catch (const Error& e) {
    return json{{"skipped", e.what()}};
  }
}

// ---------------------------------------------------------------------------
// eval

inline const std::vector<std::string>& eval_metric_names() {
  static const std::vector<std::string> names{"dsc", "asd_mm", "hd_mm", "hd_pre_mm", "hd0_mm", "hd1_mm"};
  return names;
}

struct EvalRow {
  std::string model;
  std::string case_id;
  std::optional<int> grade;
  std::string error;  // empty on success
  std::vector<MetricResult> metrics;
};

/// The value a row contributes to `metric` for one class, if any. HD is
/// stratified by grade: hd0 for grade <= 2, hd1 for grade >= 3.
inline std::optional<double> metric_value(const EvalRow& row, const MetricResult& m,
                                          const std::string& metric) {
  if (!m.applicable) return std::nullopt;
  if (metric == "dsc") return m.dsc;
  if (metric == "asd_mm") return m.asd_mm;
  if (metric == "hd_mm") return m.hd_mm;
  if (metric == "hd_pre_mm") return m.hd_pre_mm;
  if (metric == "hd0_mm") return row.grade && *row.grade <= 2 ? m.hd_mm : std::nullopt;
  if (metric == "hd1_mm") return row.grade && *row.grade >= 3 ? m.hd_mm : std::nullopt;
  return std::nullopt;
}

inline EvalRow evaluate_manifest_case(const Manifest& mf, const CaseRecord& c, const std::string& model,
                                      const RunConfig& cfg) {
  EvalRow row{model, c.case_id, c.grade, {}, {}};
  try {
    const auto it = c.predictions.find(model);
    if (it == c.predictions.end()) throw Error("no prediction for model " + model);
    const LabelMap gt = read_labels(c.ground_truth, mf.scheme.num_classes);
    const LabelMap raw = read_labels(it->second, mf.scheme.num_classes);
    require_same_geometry(raw.geometry(), gt.geometry(), "eval");
    const auto classes = mf.scheme.structure_classes();
    if (cfg.postprocess) {
      const LabelMap pp = postprocess_labels(raw, classes, cfg.allowance_voxels,
                                             cfg.postprocess_connectivity, cfg.gap_metric);
      row.metrics = evaluate_case(pp, gt, classes, &raw);
    } else {
      row.metrics = evaluate_case(raw, gt, classes, &raw);
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.metrics.clear();
  }
  return row;
}

struct EvalReport {
  std::string json_text;
  std::string summary_csv;
  std::string per_case_csv;
  std::size_t failed_rows = 0;
  std::size_t total_rows = 0;
};

inline std::string per_case_csv_header() {
  return "model,case_id,grade,class,class_name,status,dsc,asd_mm,hd_mm,hd_pre_mm\n";
}

inline EvalReport run_eval(const Manifest& mf, const RunConfig& cfg, unsigned jobs) {
  const auto models = mf.models();
  const auto classes = mf.scheme.structure_classes();
  std::vector<std::pair<std::string, const CaseRecord*>> work;
  for (const auto& m : models)
    for (const auto& c : mf.cases)
      if (c.predictions.count(m)) work.emplace_back(m, &c);

  std::vector<EvalRow> rows(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    rows[i] = evaluate_manifest_case(mf, *work[i].second, work[i].first, cfg);
  });

  EvalReport rep;
  rep.total_rows = rows.size();
  json cases = json::array();
  std::ostringstream per_case;
  per_case << per_case_csv_header();
  auto csv_opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : rows) {
    json jr{{"model", r.model},
            {"case_id", r.case_id},
            {"grade", r.grade ? json(*r.grade) : json(nullptr)},
            {"status", r.error.empty() ? "ok" : "error"}};
    if (!r.error.empty()) {
      ++rep.failed_rows;
      jr["error"] = r.error;
    }
    json metrics = json::array();
    for (const auto& m : r.metrics) {
      json jm{{"class", m.class_id},
              {"class_name", mf.scheme.name(m.class_id)},
              {"applicable", m.applicable},
              {"dsc", optional_number(m.dsc)},
              {"asd_mm", optional_number(m.asd_mm)},
              {"hd_mm", optional_number(m.hd_mm)},
              {"hd_pre_mm", optional_number(m.hd_pre_mm)}};
      if (!m.note.empty()) jm["note"] = m.note;
      metrics.push_back(jm);
      per_case << r.model << ',' << r.case_id << ',' << (r.grade ? std::to_string(*r.grade) : "") << ','
               << m.class_id << ',' << mf.scheme.name(m.class_id) << ','
               << (m.applicable ? "ok" : "not_applicable") << ',' << csv_opt(m.dsc) << ','
               << csv_opt(m.asd_mm) << ',' << csv_opt(m.hd_mm) << ',' << csv_opt(m.hd_pre_mm) << '\n';
    }
    if (!r.error.empty())
      per_case << r.model << ',' << r.case_id << ',' << (r.grade ? std::to_string(*r.grade) : "")
               << ",,,error,,,,\n";
    jr["metrics"] = metrics;
    cases.push_back(jr);
  }

  // values[model][class][metric] in case order.
  std::map<std::string, std::map<int, std::map<std::string, std::vector<double>>>> values;
  for (const auto& r : rows)
    for (const auto& m : r.metrics)
      for (const auto& metric : eval_metric_names())
        if (auto v = metric_value(r, m, metric)) values[r.model][m.class_id][metric].push_back(*v);

  json aggregate = json::object();
  for (const auto& model : models) {
    json jm = json::object();
    for (int cls : classes) {
      json jc = json::object();
      for (const auto& metric : eval_metric_names())
        jc[metric] = stats_json(sample_stats(values[model][cls][metric]));
      jm[mf.scheme.name(cls)] = jc;
    }
    aggregate[model] = jm;
  }

  json tukey = json::object();
  // significant_vs[class][metric][model] -> other models
  std::map<int, std::map<std::string, std::map<std::string, std::vector<std::string>>>> significant_vs;
  if (models.size() >= 2) {
    for (int cls : classes) {
      json jc = json::object();
      for (const auto& metric : eval_metric_names()) {
        std::vector<NamedSample> groups;
        for (const auto& model : models) groups.emplace_back(model, values[model][cls][metric]);
        std::optional<GroupComparison> g;
        jc[metric] = try_tukey(groups, cfg.significance_alpha, &g);
        if (g)
          for (const auto& p : g->pairs)
            if (p.significant) {
              significant_vs[cls][metric][g->labels[p.first]].push_back(g->labels[p.second]);
              significant_vs[cls][metric][g->labels[p.second]].push_back(g->labels[p.first]);
            }
      }
      tukey[mf.scheme.name(cls)] = jc;
    }
  }

  std::ostringstream summary;
  summary << "class,metric,model,mean,std,n,significant_vs\n";
  for (int cls : classes)
    for (const auto& metric : eval_metric_names())
      for (const auto& model : models) {
        const SampleStats s = sample_stats(values[model][cls][metric]);
        std::string sig;
        for (const auto& other : significant_vs[cls][metric][model]) sig += (sig.empty() ? "" : ";") + other;
        summary << mf.scheme.name(cls) << ',' << metric << ',' << model << ','
                << (s.mean ? format_number(*s.mean) : "") << ','
                << (s.stddev ? format_number(*s.stddev) : "") << ',' << s.n << ',' << sig << '\n';
      }

  json classes_json = json::array();
  for (int cls : classes) classes_json.push_back({{"id", cls}, {"name", mf.scheme.name(cls)}});
  json report{{"metadata", metadata("eval")},
              {"postprocess", cfg.postprocess},
              {"classes", classes_json},
              {"models", models},
              {"cases", cases},
              {"aggregate", aggregate},
              {"tukey", tukey}};
  rep.json_text = report.dump(2) + "\n";
  rep.summary_csv = summary.str();
  rep.per_case_csv = per_case.str();
  return rep;
}

// ---------------------------------------------------------------------------
// detect

inline json counts_json(const ConfusionCounts& c) {
  return json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn},
              {"positives", c.positives()}, {"negatives", c.negatives()},
              {"predicted_positive", c.predicted_positive()}};
}

inline json summary_json(const DetectionSummary& s) {
  json per_bone = json::object();
  for (const auto& [bone, c] : s.per_bone) per_bone[to_string(bone)] = counts_json(c);
  return json{{"counts", counts_json(s.counts)},
              {"accuracy", s.accuracy},
              {"tpr", optional_number(s.tpr)},
              {"tnr", optional_number(s.tnr)},
              {"mean_dsc", optional_number(s.mean_dsc)},
              {"per_bone", per_bone}};
}

/// Bone cases of one manifest case for one model.
inline std::vector<BoneCase> load_bone_cases(const Manifest& mf, const CaseRecord& c, const std::string& model) {
  const auto it = c.predictions.find(model);
  if (it == c.predictions.end()) throw Error("no prediction for model " + model);
  const LabelMap gt = read_labels(c.ground_truth, mf.scheme.num_classes);
  const LabelMap pred = read_labels(it->second, mf.scheme.num_classes);
  require_same_geometry(pred.geometry(), gt.geometry(), "detect");
  const auto probs = c.probabilities.find(model);
  std::vector<BoneCase> out;
  for (const auto& b : mf.scheme.bones) {
    BoneCase bc{c.case_id, b.bone, class_mask(pred, b.lesion_class), class_mask(gt, b.lesion_class), std::nullopt};
    if (probs != c.probabilities.end()) {
      if (auto p = probs->second.find(b.lesion_class); p != probs->second.end()) {
        Volume v = read_volume(p->second);
        require_same_geometry(v.geometry(), gt.geometry(), "detect");
        bc.prob = std::move(v);
      }
    }
    out.push_back(std::move(bc));
  }
  return out;
}

struct DetectReport {
  std::string json_text;
  bool ok = true;
};

inline DetectReport run_detect(const Manifest& mf, const RunConfig& cfg, unsigned jobs) {
  if (mf.scheme.bones.empty()) throw Error("detect: label scheme defines no bones");
  DetectReport rep;
  json models_json = json::object();
  for (const auto& model : mf.models()) {
    std::vector<const CaseRecord*> cases;
    for (const auto& c : mf.cases)
      if (c.predictions.count(model)) cases.push_back(&c);

    std::vector<std::vector<BoneCase>> loaded(cases.size());
    std::vector<std::string> errors(cases.size());
    parallel_for(cases.size(), jobs, [&](std::size_t i) {
      try {
        loaded[i] = load_bone_cases(mf, *cases[i], model);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    std::vector<BoneCase> bone_cases;
    json case_errors = json::array();
    std::size_t images = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (!errors[i].empty()) {
        case_errors.push_back({{"case_id", cases[i]->case_id}, {"error", errors[i]}});
        continue;
      }
      ++images;
      for (auto& bc : loaded[i]) bone_cases.push_back(std::move(bc));
    }

    json jm{{"images", images}, {"case_errors", case_errors}};
    if (bone_cases.empty()) {
      jm["error"] = "no loadable cases";
      rep.ok = false;
      models_json[model] = jm;
      continue;
    }

    // Census of the unfiltered references: every (image, bone) pair counts once.
    std::size_t positive = 0;
    for (const auto& bc : bone_cases) positive += count(bc.gt) > 0;
    jm["census"] = {{"bone_cases", bone_cases.size()},
                    {"positive", positive},
                    {"negative", bone_cases.size() - positive}};

    const auto schedule = sweep_schedule(cfg.size_thresholds, cfg.prob_thresholds, all_have_probability(bone_cases));
    std::vector<SweepStep> steps(schedule.size());
    parallel_for(schedule.size(), jobs, [&](std::size_t i) {
      steps[i] = run_sweep_step(bone_cases, schedule[i].first, schedule[i].second, cfg.detection_connectivity);
    });

    json steps_json = json::array();
    std::optional<std::pair<double, std::size_t>> best_acc, best_dsc;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const DetectionSummary s = detection_report(steps[i].outcomes);
      json js = summary_json(s);
      js["size_threshold_mm3"] = steps[i].size_threshold_mm3;
      js["prob_threshold"] = optional_number(steps[i].prob_threshold);
      steps_json.push_back(js);
      if (!best_acc || s.accuracy > best_acc->first) best_acc = std::pair{s.accuracy, i};
      if (s.mean_dsc && (!best_dsc || *s.mean_dsc > best_dsc->first)) best_dsc = std::pair{*s.mean_dsc, i};
    }
    jm["no_postprocessing"] = steps_json.front();
    jm["steps"] = steps_json;
    jm["best_accuracy"] = best_acc ? json{{"value", best_acc->first}, {"step", best_acc->second}} : json(nullptr);
    jm["best_mean_dsc"] = best_dsc ? json{{"value", best_dsc->first}, {"step", best_dsc->second}} : json(nullptr);
    try {
      const RocCurve roc = roc_from_steps(steps);
      json pts = json::array();
      for (const auto& p : roc.points)
        pts.push_back({{"fpr", p.fpr},
                       {"tpr", p.tpr},
                       {"size_threshold_mm3", p.size_threshold_mm3},
                       {"prob_threshold", optional_number(p.prob_threshold)}});
      jm["roc"] = {{"points", pts}, {"auc", roc.auc}};
    } catch (const Error& e) {
      jm["roc"] = nullptr;
      jm["error"] = e.what();
      rep.ok = false;
    }
    models_json[model] = jm;
  }
  json report{{"metadata", metadata("detect")},
              {"size_thresholds", cfg.size_thresholds},
              {"prob_thresholds", cfg.prob_thresholds},
              {"models", models_json}};
  rep.json_text = report.dump(2) + "\n";
  return rep;
}

// ---------------------------------------------------------------------------
// anomaly

struct AnomalyInputs {
  fs::path image;
  std::optional<fs::path> reconstruction;
  std::optional<fs::path> labels;
  int num_classes = 10;
};

/// Writes error_map.mha, focal_weights.mha and (with labels) masked_input.mha;
/// returns the JSON summary, also written as anomaly.json.
inline std::string run_anomaly(const AnomalyInputs& in, const RunConfig& cfg, const fs::path& out_dir) {
  if (!in.reconstruction && !in.labels) throw Error("anomaly: need a reconstruction or a label map");
  cfg.loss.validate();
  Volume x = read_volume(in.image);
  std::optional<ZStats> zs;
  if (cfg.normalize) {
    zs = z_stats(x);
    x = apply_z_normalize(x, *zs);
  }
  std::optional<LabelMap> labels;
  if (in.labels) {
    labels = read_labels(*in.labels, in.num_classes);
    require_same_geometry(labels->geometry(), x.geometry(), "anomaly");
  }
  Volume recon;
  if (in.reconstruction) {
    recon = read_volume(*in.reconstruction);
    require_same_geometry(recon.geometry(), x.geometry(), "anomaly");
    if (zs) recon = apply_z_normalize(recon, *zs);
  } else {
    recon = simulate_reconstruction(x, *labels);
  }
  const Volume e = error_map(x, recon);
  const Volume f = focal_weights(e, cfg.loss.beta);

  fs::create_directories(out_dir);
  write_volume(e, out_dir / "error_map.mha");
  write_volume(f, out_dir / "focal_weights.mha");

  auto range = [](const Volume& v) {
    const auto [lo, hi] = std::minmax_element(v.values().begin(), v.values().end());
    return json{{"min", *lo}, {"max", *hi}};
  };
  json j{{"metadata", metadata("anomaly")},
         {"normalized", cfg.normalize},
         {"reconstruction", in.reconstruction ? "file" : "simulated"},
         {"voxels", e.size()},
         {"error_map", range(e)},
         {"focal_weights", range(f)},
         {"beta", cfg.loss.beta}};
  if (zs) j["normalization"] = {{"mean", zs->mean}, {"std", zs->stddev}};
  if (labels) {
    write_volume(prepare_masked_input(x, *labels, cfg.masking_bone_classes, cfg.loss), out_dir / "masked_input.mha");
    std::set<int> lesion_classes;
    for (const auto& b : LabelScheme::knee().bones) lesion_classes.insert(b.lesion_class);
    double in_sum = 0.0, out_sum = 0.0;
    std::size_t in_n = 0, out_n = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (lesion_classes.count((*labels)[i])) {
        in_sum += e[i];
        ++in_n;
      } else {
        out_sum += e[i];
        ++out_n;
      }
    }
    j["masked_input"] = "masked_input.mha";
    j["lesion_voxels"] = in_n;
    j["mean_error_lesion"] = in_n ? json(in_sum / in_n) : json(nullptr);
    j["mean_error_outside"] = out_n ? json(out_sum / out_n) : json(nullptr);
  } else {
    j["masked_input"] = nullptr;
  }
  const std::string text = j.dump(2) + "\n";
  write_text(out_dir / "anomaly.json", text);
  return text;
}

// ---------------------------------------------------------------------------
// phantom

/// Generates cfg.phantom_cases phantoms (seeds seed, seed + 1, ...) with a
/// simulated reconstruction, prediction and lesion probability maps each,
/// plus a manifest.json over them. Returns the manifest text.
inline std::string run_phantom(const RunConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const LabelScheme scheme = LabelScheme::knee();
  json cases = json::array();
  for (std::size_t n = 0; n < cfg.phantom_cases; ++n) {
    PhantomConfig pc = cfg.phantom;
    pc.seed = cfg.phantom.seed + n;
    const Phantom ph = generate_phantom(pc);
    PredictionConfig pred_cfg = cfg.prediction;
    pred_cfg.seed = pc.seed;
    const SimulatedPrediction pred = simulate_prediction(ph, pred_cfg);

    char name[32];
    std::snprintf(name, sizeof name, "case_%03zu", n);
    const fs::path dir = out_dir / name;
    fs::create_directories(dir);
    write_volume(ph.image, dir / "image.mha");
    write_volume(ph.labels, dir / "labels.mha");
    write_volume(simulate_reconstruction(ph.image, ph.labels), dir / "recon.mha");
    write_volume(pred.labels, dir / "prediction.mha");
    json probs = json::object();
    for (int b = 0; b < 3; ++b) {
      const std::string file = "prob_" + std::to_string(scheme.bones[b].lesion_class) + ".mha";
      write_volume(pred.lesion_probability[b], dir / file);
      probs[std::to_string(scheme.bones[b].lesion_class)] = std::string(name) + "/" + file;
    }
    const int grade = static_cast<int>(CounterRng(pc.seed, Stream::PhantomLayout, 1ull << 32).uniform() * 5.0);
    cases.push_back({{"case_id", name},
                     {"image", std::string(name) + "/image.mha"},
                     {"ground_truth", std::string(name) + "/labels.mha"},
                     {"reconstruction", std::string(name) + "/recon.mha"},
                     {"predictions", {{"phantom", std::string(name) + "/prediction.mha"}}},
                     {"probabilities", {{"phantom", probs}}},
                     {"grade", std::min(grade, 4)}});
  }
  json bones = json::array();
  for (const auto& b : scheme.bones)
    bones.push_back({{"bone", to_string(b.bone)},
                     {"bone_class", b.bone_class},
                     {"cartilage_class", b.cartilage_class},
                     {"lesion_class", b.lesion_class}});
  json manifest{{"label_scheme", {{"num_classes", scheme.num_classes}, {"class_names", scheme.class_names}, {"bones", bones}}},
                {"cases", cases}};
  const std::string text = manifest.dump(2) + "\n";
  write_text(out_dir / "manifest.json", text);
  return text;
}

// ---------------------------------------------------------------------------
// augment

inline std::string run_augment(const fs::path& image, const fs::path& labels, int num_classes,
                               const RunConfig& cfg, const fs::path& out_dir) {
  const Volume x = read_volume(image);
  const LabelMap l = read_labels(labels, num_classes);
  const AffineParams p = sample_affine(cfg.augment);
  const auto [xa, la] = apply_affine(x, l, p);
  fs::create_directories(out_dir);
  write_volume(xa, out_dir / "image.mha");
  write_volume(la, out_dir / "labels.mha");
  const json j{{"metadata", metadata("augment")},
               {"seed", cfg.augment.seed},
               {"scale", p.scale},
               {"axis", p.axis},
               {"angle_deg", p.angle_deg},
               {"translation_vox", p.translation_vox}};
  const std::string text = j.dump(2) + "\n";
  write_text(out_dir / "augment.json", text);
  return text;
}

// ---------------------------------------------------------------------------
// stats

struct StatsInput {
  std::optional<std::string> name;  // forced group name; else the model column or file stem
  fs::path path;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Tukey HSD per (class, metric) across models, from per-case CSV files in
/// the eval per_case.csv layout (columns case_id, class, dsc, asd_mm, hd_mm,
/// hd_pre_mm; optional model, status, grade).
inline std::string run_stats(const std::vector<StatsInput>& inputs, double alpha) {
  // values[class][metric][group]
  std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>> values;
  std::set<std::string> groups;
  const std::vector<std::string> metrics{"dsc", "asd_mm", "hd_mm", "hd_pre_mm"};
  for (const auto& in : inputs) {
    std::ifstream f(in.path);
    if (!f) throw Error("stats: cannot open " + in.path.string());
    std::string line;
    if (!std::getline(f, line)) throw Error("stats: empty file " + in.path.string());
    const auto header = detail::split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    if (!col.count("class")) throw Error("stats: missing 'class' column in " + in.path.string());
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const auto cells = detail::split_csv_line(line);
      auto cell = [&](const std::string& name) -> std::string {
        auto it = col.find(name);
        return it != col.end() && it->second < cells.size() ? cells[it->second] : std::string();
      };
      if (col.count("status") && cell("status") != "ok") continue;
      std::string group = in.name ? *in.name : (col.count("model") ? cell("model") : in.path.stem().string());
      std::string cls = col.count("class_name") && !cell("class_name").empty() ? cell("class_name") : cell("class");
      if (cls.empty()) continue;
      groups.insert(group);
      for (const auto& m : metrics) {
        const std::string v = cell(m);
        if (v.empty()) continue;
        double d = 0.0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
        if (ec != std::errc() || p != v.data() + v.size())
          throw Error("stats: malformed number '" + v + "' in " + in.path.string());
        values[cls][m][group].push_back(d);
      }
    }
  }
  json out = json::object();
  for (auto& [cls, by_metric] : values) {
    json jc = json::object();
    for (const auto& m : metrics) {
      std::vector<NamedSample> samples;
      for (const auto& g : groups) samples.emplace_back(g, by_metric[m][g]);
      jc[m] = try_tukey(samples, alpha);
    }
    out[cls] = jc;
  }
  const json report{{"metadata", metadata("stats")},
                    {"alpha", alpha},
                    {"groups", std::vector<std::string>(groups.begin(), groups.end())},
                    {"comparisons", out}};
  return report.dump(2) + "\n";
}

}  // namespace kneeseg::batch

#endif  // KNEESEG_BATCH_COMMANDS_HPP
