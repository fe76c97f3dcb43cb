// chi2nn: run the benchmark experiments and print accuracy / PCA tables.
//
//   chi2nn run --dataset all --model both --seed 42 --out report.json
//   chi2nn table2
//
// Exit codes: 0 ok, 1 usage, 2 data integrity, 3 numeric divergence.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "chi2nn/data.hpp"
#include "chi2nn/experiment.hpp"

namespace fs = std::filesystem;
using namespace chi2nn;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIntegrity = 2, kNumeric = 3 };

struct Options {
  std::string dataset = "all";
  std::string model = "both";
  std::string pca_variant = "range";
  std::string pca_scope = "pre_split";
  std::string epsilon_mode = "quantile";
  std::string gradient_mode = "corrected";
  std::string bpnn_input = "pca";
  std::size_t reps = 20;
  std::uint64_t seed = 42;
  std::string out;
  std::string dump_encoded;
  std::string data_dir;
  bool timing = false;
  std::size_t jobs = 0;
  ExperimentConfig cfg;
};

fs::path data_root(const Options& o) {
  if (!o.data_dir.empty()) return o.data_dir;
  if (const char* env = std::getenv("CHI2NN_DATA_DIR")) return env;
  return CHI2NN_DATA_DIR;
}

std::vector<DatasetId> selected_datasets(const std::string& name) {
  if (name == "all") return {kAllDatasets.begin(), kAllDatasets.end()};
  auto id = parse_dataset_id(name);
  if (!id) throw ConfigError("unknown dataset '" + name + "'");
  return {*id};
}

std::vector<ModelKind> selected_models(const std::string& name) {
  if (name == "both") return {ModelKind::chi2nn, ModelKind::bpnn};
  if (name == "chi2nn") return {ModelKind::chi2nn};
  if (name == "bpnn") return {ModelKind::bpnn};
  throw ConfigError("unknown model '" + name + "'");
}

std::vector<Dataset> load_all(const Options& o) {
  std::vector<Dataset> out;
  for (auto id : selected_datasets(o.dataset))
    out.push_back(load_dataset(id, data_root(o) / std::string(to_string(id))));
  return out;
}

void finish_config(Options& o) {
  auto& c = o.cfg;
  c.pca_variant = pca::parse_variant(o.pca_variant);
  if (o.pca_scope == "pre_split") c.pca_scope = PcaScope::pre_split;
  else if (o.pca_scope == "train_only") c.pca_scope = PcaScope::train_only;
  else throw ConfigError("unknown pca scope '" + o.pca_scope + "'");
  if (o.epsilon_mode == "quantile") c.chi2.epsilon_mode = EpsilonMode::quantile;
  else if (o.epsilon_mode == "df") c.chi2.epsilon_mode = EpsilonMode::df_mean;
  else throw ConfigError("unknown epsilon mode '" + o.epsilon_mode + "'");
  if (o.gradient_mode == "corrected") c.chi2.gradient_mode = GradientMode::corrected;
  else if (o.gradient_mode == "paper") c.chi2.gradient_mode = GradientMode::paper_literal;
  else throw ConfigError("unknown gradient mode '" + o.gradient_mode + "'");
  if (o.bpnn_input == "pca") c.bpnn_uses_pca = true;
  else if (o.bpnn_input == "raw") c.bpnn_uses_pca = false;
  else throw ConfigError("unknown bpnn input '" + o.bpnn_input + "'");
  if (!(c.pca_threshold > 0.0 && c.pca_threshold <= 1.0))
    throw ConfigError("pca threshold must be in (0,1]");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
    throw ConfigError("train fraction must be in (0,1)");
  if (o.reps < 1) throw ConfigError("reps must be >= 1");
  c.jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  c.chi2.validate();
}

int cmd_run(Options& o) {
  finish_config(o);
  const auto models = selected_models(o.model);
  const auto datasets = load_all(o);

  if (!o.dump_encoded.empty()) {
    if (datasets.size() != 1) throw ConfigError("--dump-encoded needs a single --dataset");
    std::ofstream f(o.dump_encoded);
    if (!f) throw IoError("cannot write " + o.dump_encoded);
    write_encoded_csv(datasets.front(), f);
  }

  std::vector<ExperimentReport> reports;
  int status = kOk;
  for (const auto& ds : datasets) {
    for (auto kind : models) {
      auto r = run_experiment(ds, kind, o.cfg, o.reps, o.seed);
      if (r.excluded) {
        std::cerr << "warning: " << to_string(ds.id) << "/" << to_string(kind) << ": " << r.excluded
                  << " of " << r.reps << " repetitions diverged and were excluded\n";
        if (r.accuracies.empty()) status = kNumeric;
      }
      reports.push_back(std::move(r));
    }
  }
  if (status != kOk) return status;

  const auto rendered = render_report(reports, o.timing);
  std::cout << rendered.table;
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw IoError("cannot write " + o.out);
    f << rendered.json;
  }
  return kOk;
}

int cmd_table2(Options& o) {
  std::vector<PcaComparison> rows;
  int status = kOk;
  for (auto id : selected_datasets(o.dataset)) {
    Dataset ds;
    try {
      ds = load_dataset(id, data_root(o) / std::string(to_string(id)));
    } catch (const IoError& e) {
      std::cerr << "skipping " << to_string(id) << ": " << e.what() << '\n';
      status = kIntegrity;
      continue;
    }
    for (auto v : {pca::Variant::covariance, pca::Variant::correlation, pca::Variant::range})
      rows.push_back(compare_pca(ds, v, o.cfg.pca_threshold));
  }
  std::cout << render_pca_table(rows);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chi-square test neural network experiments"};
  app.require_subcommand(0, 1);
  Options o;
  auto& c = o.cfg;

  bool table2_flag = false;
  app.add_flag("--table2", table2_flag, "Print PCA cumulative contribution rates and exit");
  app.add_option("--data-dir", o.data_dir, "Root directory holding <dataset>/ raw files");

  auto* run = app.add_subcommand("run", "Repeated train/test experiment");
  run->add_option("--dataset", o.dataset, "iris|ilpd|ba|bcw|balloons|all")->capture_default_str();
  run->add_option("--model", o.model, "chi2nn|bpnn|both")->capture_default_str();
  run->add_option("--k", c.chi2.sections_per_dim, "Sections per PCA dimension")->capture_default_str();
  run->add_option("--xi", c.chi2.xi, "Surrogate output slope")->capture_default_str();
  run->add_option("--lr", c.chi2.rho, "Learning rate")->capture_default_str();
  run->add_option("--hidden", c.chi2.hidden, "Hidden units")->capture_default_str();
  run->add_option("--pca-threshold", c.pca_threshold, "Cumulative contribution target")->capture_default_str();
  run->add_option("--pca-scope", o.pca_scope, "pre_split|train_only")->capture_default_str();
  run->add_option("--pca-variant", o.pca_variant, "covariance|correlation|range")->capture_default_str();
  run->add_option("--train-frac", c.train_fraction, "Training fraction")->capture_default_str();
  run->add_option("--reps", o.reps, "Repetitions")->capture_default_str();
  run->add_option("--seed", o.seed, "Base seed; repetition t uses seed+t")->capture_default_str();
  run->add_option("--max-epochs", c.chi2.max_epochs, "Epoch cap")->capture_default_str();
  run->add_option("--significance", c.chi2.significance_alpha, "Chi-square test level")->capture_default_str();
  run->add_option("--epsilon-mode", o.epsilon_mode, "quantile|df")->capture_default_str();
  run->add_option("--gradient-mode", o.gradient_mode, "corrected|paper")->capture_default_str();
  run->add_option("--init-scale", c.chi2.init_scale, "Initial weights uniform on +-scale")->capture_default_str();
  run->add_option("--bpnn-goal", c.bpnn_mse_goal, "BPNN MSE goal")->capture_default_str();
  run->add_option("--bpnn-max-epochs", c.bpnn_max_epochs, "BPNN epoch cap")->capture_default_str();
  run->add_option("--bpnn-input", o.bpnn_input, "pca|raw")->capture_default_str();
  run->add_option("--jobs", o.jobs, "Concurrent repetitions (0 = all cores)");
  run->add_option("--out", o.out, "JSON report path");
  run->add_option("--dump-encoded", o.dump_encoded, "Write the encoded dataset CSV");
  run->add_option("--data-dir", o.data_dir, "Root directory holding <dataset>/ raw files");
  run->add_flag("--timing", o.timing, "Include wall-clock seconds in the JSON report");

  auto* table2 = app.add_subcommand("table2", "PCA cumulative contribution rates per variant");
  table2->add_option("--dataset", o.dataset, "iris|ilpd|ba|bcw|balloons|all")->capture_default_str();
  table2->add_option("--pca-threshold", c.pca_threshold, "Cumulative contribution target")->capture_default_str();
  table2->add_option("--data-dir", o.data_dir, "Root directory holding <dataset>/ raw files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (table2_flag || table2->parsed()) return cmd_table2(o);
    if (run->parsed()) return cmd_run(o);
    std::cout << app.help();
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IntegrityError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kIntegrity;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kIntegrity;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
