#pragma once

// Repeated train/test experiment: split, reduce with PCA, bin, train, score;
// aggregated into a report per (dataset, model).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chi2nn/binning.hpp"
#include "chi2nn/bpnn.hpp"
#include "chi2nn/chi2_classifier.hpp"
#include "chi2nn/data.hpp"
#include "chi2nn/pca.hpp"

namespace chi2nn {

inline constexpr int kReportSchemaVersion = 1;

// pre_split: PCA fitted once on the whole set before splitting.
// train_only: PCA refitted on each training partition.
enum class PcaScope { pre_split, train_only };

inline std::string_view to_string(PcaScope s) {
  return s == PcaScope::pre_split ? "pre_split" : "train_only";
}

struct ExperimentConfig {
  TrainConfig chi2;
  double bpnn_mse_goal = 1e-3;
  std::size_t bpnn_max_epochs = 5000;
  bool bpnn_uses_pca = true;
  double pca_threshold = 0.90;
  pca::Variant pca_variant = pca::Variant::range;
  PcaScope pca_scope = PcaScope::pre_split;
  double train_fraction = 0.9;
  std::size_t jobs = 1;
};

struct RepetitionResult {
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  std::size_t components = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  double accuracy = 0.0;
  std::string stop_reason;
  std::size_t epochs = 0;
  bool excluded = false;
  std::string failure;
};

struct ExperimentReport {
  DatasetId dataset{};
  ModelKind model{};
  ExperimentConfig config;
  std::size_t reps = 0;
  std::uint64_t base_seed = 0;
  std::vector<RepetitionResult> repetitions;
  std::vector<double> accuracies;  // included repetitions, in seed order
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> cumulative_contribution;  // PCA on the full set
  std::map<std::string, std::size_t> stop_reasons;
  std::size_t excluded = 0;
  double wall_seconds = 0.0;
};

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Sample standard deviation; 0 for fewer than two values.
inline double stddev_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace detail {

inline RepetitionResult run_one(const Dataset& ds, ModelKind kind, const ExperimentConfig& cfg,
                                const std::optional<pca::Model>& shared_pca, std::uint64_t seed) {
  RepetitionResult rep;
  rep.seed = seed;
  const Split sp = split_dataset(ds, cfg.train_fraction, seed);
  rep.split_seed = sp.seed;
  rep.train_rows = sp.train_indices.size();
  rep.test_rows = sp.test_indices.size();

  const Matrix x_train_raw = ds.features.select_rows(sp.train_indices);
  const Matrix x_test_raw = ds.features.select_rows(sp.test_indices);
  std::vector<int> y_train, y_test;
  for (auto i : sp.train_indices) y_train.push_back(ds.labels[i]);
  for (auto i : sp.test_indices) y_test.push_back(ds.labels[i]);

  const bool reduce = kind == ModelKind::chi2nn || cfg.bpnn_uses_pca;
  Matrix x_train = x_train_raw, x_test = x_test_raw;
  if (reduce) {
    const pca::Model model = shared_pca ? *shared_pca : pca::fit(x_train_raw, cfg.pca_variant);
    rep.components = pca::select_count(model, cfg.pca_threshold);
    x_train = pca::project(model, x_train_raw, rep.components);
    x_test = pca::project(model, x_test_raw, rep.components);
  } else {
    rep.components = ds.dims();
  }

  try {
    Network net;
    if (kind == ModelKind::chi2nn) {
      TrainConfig tc = cfg.chi2;
      tc.seed = seed;
      const BinGrid grid = fit_grid(x_train, tc.sections_per_dim);
      auto result = train(x_train, y_train, grid, tc);
      rep.stop_reason = std::string(to_string(result.trace.stop_reason));
      rep.epochs = result.trace.epochs.size();
      net = std::move(result.net);
    } else {
      bpnn::Config bc;
      bc.hidden = cfg.chi2.hidden;
      bc.rho = cfg.chi2.rho;
      bc.mse_goal = cfg.bpnn_mse_goal;
      bc.max_epochs = cfg.bpnn_max_epochs;
      bc.seed = seed;
      bc.init_scale = cfg.chi2.init_scale;
      auto result = bpnn::train(x_train, y_train, bc);
      rep.stop_reason = std::string(bpnn::to_string(result.trace.stop_reason));
      rep.epochs = result.trace.mse.size();
      net = std::move(result.net);
    }
    rep.accuracy = accuracy(predict(net, x_test), y_test);
  } catch (const NumericError& e) {
    rep.excluded = true;
    rep.stop_reason = "diverged";
    rep.failure = e.what();
  }
  return rep;
}

}  // namespace detail

/// Repetition t uses seed base_seed + t for both the split and the weight
/// initialisation. Repetitions may run concurrently (cfg.jobs); results are
/// assembled in seed order.
inline ExperimentReport run_experiment(const Dataset& ds, ModelKind kind,
                                       const ExperimentConfig& cfg, std::size_t reps,
                                       std::uint64_t base_seed) {
  if (reps == 0) throw DomainError("run_experiment: reps must be >= 1");
  cfg.chi2.validate();
  const auto start = std::chrono::steady_clock::now();

  ExperimentReport report;
  report.dataset = ds.id;
  report.model = kind;
  report.config = cfg;
  report.reps = reps;
  report.base_seed = base_seed;

  const pca::Model full = pca::fit(ds.features, cfg.pca_variant);
  report.cumulative_contribution = full.cumulative();
  std::optional<pca::Model> shared;
  if (cfg.pca_scope == PcaScope::pre_split) shared = full;

  report.repetitions.resize(reps);
  const std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
  for (std::size_t first = 0; first < reps; first += jobs) {
    const std::size_t last = std::min(reps, first + jobs);
    std::vector<std::future<RepetitionResult>> pending;
    for (std::size_t t = first; t < last; ++t)
      pending.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                   detail::run_one, std::cref(ds), kind, std::cref(cfg),
                                   std::cref(shared), base_seed + t));
    for (std::size_t t = first; t < last; ++t) report.repetitions[t] = pending[t - first].get();
  }

  for (const auto& rep : report.repetitions) {
    ++report.stop_reasons[rep.stop_reason];
    if (rep.excluded) {
      ++report.excluded;
      continue;
    }
    report.accuracies.push_back(rep.accuracy);
  }
  report.mean = mean_of(report.accuracies);
  report.stddev = stddev_of(report.accuracies);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

/// Markdown accuracy table: one row per dataset, one column per model.
inline std::string render_table(const std::vector<ExperimentReport>& reports) {
  std::vector<DatasetId> rows;
  std::vector<ModelKind> cols;
  for (const auto& r : reports) {
    if (std::find(rows.begin(), rows.end(), r.dataset) == rows.end()) rows.push_back(r.dataset);
    if (std::find(cols.begin(), cols.end(), r.model) == cols.end()) cols.push_back(r.model);
  }
  std::sort(cols.begin(), cols.end());
  std::ostringstream out;
  out << "| Data set |";
  for (auto c : cols) out << ' ' << to_string(c) << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < cols.size(); ++i) out << "---:|";
  out << '\n';
  for (auto d : rows) {
    out << "| " << to_string(d) << " |";
    for (auto c : cols) {
      auto it = std::find_if(reports.begin(), reports.end(),
                             [&](const auto& r) { return r.dataset == d && r.model == c; });
      out << ' ' << (it == reports.end() ? std::string("-") : percent(it->mean)) << " |";
    }
    out << '\n';
  }
  return out.str();
}

inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["k"] = c.chi2.sections_per_dim;
  j["xi"] = c.chi2.xi;
  j["lr"] = c.chi2.rho;
  j["hidden"] = c.chi2.hidden;
  j["significance"] = c.chi2.significance_alpha;
  j["epsilon_mode"] = to_string(c.chi2.epsilon_mode);
  j["gradient_mode"] = to_string(c.chi2.gradient_mode);
  j["max_epochs"] = c.chi2.max_epochs;
  j["init_scale"] = c.chi2.init_scale;
  j["bpnn_mse_goal"] = c.bpnn_mse_goal;
  j["bpnn_max_epochs"] = c.bpnn_max_epochs;
  j["bpnn_input"] = c.bpnn_uses_pca ? "pca" : "raw";
  j["pca_threshold"] = c.pca_threshold;
  j["pca_variant"] = pca::to_string(c.pca_variant);
  j["pca_scope"] = to_string(c.pca_scope);
  j["train_fraction"] = c.train_fraction;
  return j;
}

inline nlohmann::ordered_json report_json(const ExperimentReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["dataset"] = to_string(r.dataset);
  j["model"] = to_string(r.model);
  j["reps"] = r.reps;
  j["base_seed"] = r.base_seed;
  j["config"] = config_json(r.config);
  j["pca"] = {{"variant", pca::to_string(r.config.pca_variant)},
              {"scope", to_string(r.config.pca_scope)},
              {"threshold", r.config.pca_threshold},
              {"cumulative_contribution", r.cumulative_contribution}};
  auto reps = nlohmann::ordered_json::array();
  for (const auto& rep : r.repetitions) {
    nlohmann::ordered_json e;
    e["seed"] = rep.seed;
    e["split_seed"] = rep.split_seed;
    e["components"] = rep.components;
    e["train_rows"] = rep.train_rows;
    e["test_rows"] = rep.test_rows;
    e["accuracy"] = rep.accuracy;
    e["stop_reason"] = rep.stop_reason;
    e["epochs"] = rep.epochs;
    e["excluded"] = rep.excluded;
    if (rep.excluded) e["failure"] = rep.failure;
    reps.push_back(std::move(e));
  }
  j["repetitions"] = std::move(reps);
  j["accuracies"] = r.accuracies;
  j["mean"] = r.mean;
  j["std"] = r.stddev;
  j["excluded"] = r.excluded;
  j["stop_reasons"] = r.stop_reasons;
  if (include_timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

/// Structured report: every field of every experiment.
inline nlohmann::ordered_json reports_json(const std::vector<ExperimentReport>& reports,
                                           bool include_timing = false) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r, include_timing));
  j["reports"] = std::move(arr);
  return j;
}

struct RenderedReport {
  std::string table;
  std::string json;
};

inline RenderedReport render_report(const std::vector<ExperimentReport>& reports,
                                    bool include_timing = false) {
  if (reports.empty()) throw DomainError("render_report: no reports");
  for (const auto& r : reports)
    if (r.accuracies.empty())
      throw DomainError("render_report: report for " + std::string(to_string(r.dataset)) +
                        " has no included repetitions");
  return {render_table(reports), reports_json(reports, include_timing).dump(2) + "\n"};
}

// ---------------------------------------------------------------------------
// PCA contribution table

struct PublishedPcaRow {
  DatasetId id;
  std::vector<double> cumulative_percent;  // first five PCs, as published
  std::size_t components;                  // PCs used at the 90% rule
};

inline const std::vector<PublishedPcaRow>& published_pca_rows() {
  static const std::vector<PublishedPcaRow> rows = {
      {DatasetId::iris, {86.05, 96.88, 99.42, 100.0}, 2},
      {DatasetId::ilpd, {62.68, 94.34, 99.83, 99.97, 100.0}, 2},
      {DatasetId::ba, {55.39, 87.23, 95.5, 100.0}, 3},
      {DatasetId::bcw, {69.05, 76.25, 82.3, 86.74, 90.64}, 5},
      {DatasetId::balloons, {27.67, 53.88, 77.6, 100.0}, 4},
  };
  return rows;
}

inline const PublishedPcaRow& published_pca_row(DatasetId id) {
  for (const auto& r : published_pca_rows())
    if (r.id == id) return r;
  throw DomainError("no published PCA row");
}

struct PcaComparison {
  DatasetId id{};
  pca::Variant variant{};
  std::vector<double> cumulative_percent;
  std::size_t components = 0;
  double max_abs_deviation = 0.0;  // percentage points over the published PCs
};

inline PcaComparison compare_pca(const Dataset& ds, pca::Variant variant, double threshold) {
  const auto model = pca::fit(ds.features, variant);
  const auto& pub = published_pca_row(ds.id);
  PcaComparison c;
  c.id = ds.id;
  c.variant = variant;
  for (double v : model.cumulative()) c.cumulative_percent.push_back(100.0 * v);
  c.components = pca::select_count(model, threshold);
  for (std::size_t k = 0; k < pub.cumulative_percent.size() && k < c.cumulative_percent.size(); ++k)
    c.max_abs_deviation =
        std::max(c.max_abs_deviation, std::fabs(c.cumulative_percent[k] - pub.cumulative_percent[k]));
  return c;
}

inline std::string render_pca_table(const std::vector<PcaComparison>& rows) {
  std::ostringstream out;
  out << "| Data set | Variant | PC1 | PC2 | PC3 | PC4 | PC5 | L@90% | max dev (pp) |\n"
      << "|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
  char buf[64];
  for (const auto& r : rows) {
    const auto& pub = published_pca_row(r.id);
    auto cells = [&](const std::vector<double>& v) {
      std::string s;
      for (std::size_t k = 0; k < 5; ++k) {
        if (k < v.size()) std::snprintf(buf, sizeof buf, " %.2f |", v[k]);
        else std::snprintf(buf, sizeof buf, " N/A |");
        s += buf;
      }
      return s;
    };
    out << "| " << to_string(r.id) << " | " << pca::to_string(r.variant) << " |"
        << cells(r.cumulative_percent) << ' ' << r.components << " |";
    std::snprintf(buf, sizeof buf, " %.2f |\n", r.max_abs_deviation);
    out << buf;
    out << "| " << to_string(r.id) << " | published |" << cells(pub.cumulative_percent) << ' '
        << pub.components << " | |\n";
  }
  return out.str();
}

}  // namespace chi2nn
