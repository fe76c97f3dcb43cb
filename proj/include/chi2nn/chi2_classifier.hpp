#pragma once

// Chi-square test network training.
//
// The output unit is a hard threshold, so the per-section predicted-positive
// counts v_i (and with them E = 1/2 sum (v_i/N - p_i)^2) are piecewise
// constant in the parameters. Training therefore uses a surrogate gradient in
// which the derivative of the threshold is replaced by a constant xi. A
// smooth variant (sigmoid output, exact derivative) exists so the gradient
// code can be checked against finite differences.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chi2nn/binning.hpp"
#include "chi2nn/errors.hpp"
#include "chi2nn/matrix.hpp"
#include "chi2nn/network.hpp"
#include "chi2nn/stats.hpp"

namespace chi2nn {

// How the input-to-hidden gradient picks up the downstream weight.
// corrected: chain rule through the output unit, factor w_out_j.
// paper_literal: factor w_in(k,j) as printed in the update rule; for the
// hidden thresholds (no k index) the column sum of w_in is used.
enum class GradientMode { corrected, paper_literal };

// quantile: epsilon is the upper-alpha chi-square critical value.
// df_mean: epsilon is the degrees of freedom (the chi-square mean).
enum class EpsilonMode { quantile, df_mean };

// hard: training network (threshold output, derivative replaced by xi).
// smooth: sigmoid output with its exact derivative; verification only.
enum class OutputMode { hard, smooth };

enum class StopReason { chi_square_pass, max_epochs, degenerate };

inline std::string_view to_string(GradientMode m) {
  return m == GradientMode::corrected ? "corrected" : "paper";
}
inline std::string_view to_string(EpsilonMode m) {
  return m == EpsilonMode::quantile ? "quantile" : "df";
}
inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::chi_square_pass: return "chi_square_pass";
    case StopReason::max_epochs: return "max_epochs";
    case StopReason::degenerate: return "degenerate";
  }
  return "?";
}

struct TrainConfig {
  std::size_t sections_per_dim = 2;  // K
  double xi = 0.5;
  double rho = 0.1;
  std::size_t hidden = 10;
  double significance_alpha = 0.05;
  EpsilonMode epsilon_mode = EpsilonMode::quantile;
  std::size_t max_epochs = 5000;
  GradientMode gradient_mode = GradientMode::corrected;
  std::uint64_t seed = 0;
  double init_scale = 0.5;
  double divergence_limit = 1e6;

  void validate() const {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("learning rate must be in (0,1)");
    if (!(xi > 0.0)) throw ConfigError("xi must be > 0");
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
    if (sections_per_dim < 1) throw ConfigError("K must be >= 1");
    if (!(significance_alpha > 0.0 && significance_alpha < 1.0))
      throw ConfigError("significance must be in (0,1)");
    if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
  }
};

struct EpochRecord {
  double error = 0.0;  // E
  double eta = 0.0;
  int effective_df = 1;
  double epsilon = 0.0;
  double unexpected = 0.0;  // predicted positives in sections with m_i = 0
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  StopReason stop_reason = StopReason::max_epochs;
};

struct TrainResult {
  Network net;
  TrainTrace trace;
};

/// Training rows together with their section indices.
struct BinnedRows {
  const Matrix& x;
  std::vector<std::size_t> section;

  BinnedRows(const Matrix& rows, const BinGrid& grid) : x(rows), section(bin_indices(grid, rows)) {}
  BinnedRows(const Matrix& rows, std::vector<std::size_t> sections)
      : x(rows), section(std::move(sections)) {}
};

namespace detail {

// Per-row forward values shared by the counting and gradient passes.
struct ForwardCache {
  Matrix hidden;            // n x h
  std::vector<double> sum;  // output pre-activation

  ForwardCache(const Network& net, const Matrix& x) : hidden(x.rows(), net.hidden()), sum(x.rows()) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      hidden_forward(net, x.row(i), hidden.row(i));
      sum[i] = output_sum(net, hidden.row(i));
    }
  }
};

inline double row_output(OutputMode mode, double s) {
  return mode == OutputMode::hard ? static_cast<double>(threshold_output(s)) : sigmoid(s);
}

inline std::vector<double> tally(const ForwardCache& fc, std::span<const std::size_t> section,
                                 std::size_t sections, OutputMode mode) {
  std::vector<double> v(sections, 0.0);
  for (std::size_t i = 0; i < section.size(); ++i) v[section[i]] += row_output(mode, fc.sum[i]);
  return v;
}

}  // namespace detail

/// v_i: number of rows of section i the network labels positive (or, in
/// smooth mode, the sum of sigmoid outputs).
inline std::vector<double> accumulate_v(const Network& net, const BinnedRows& rows,
                                        std::size_t sections,
                                        OutputMode mode = OutputMode::hard) {
  detail::ForwardCache fc(net, rows.x);
  return detail::tally(fc, rows.section, sections, mode);
}

inline std::vector<double> accumulate_v(const Network& net, const BinGrid& grid,
                                        const Matrix& x) {
  return accumulate_v(net, BinnedRows(x, grid), grid.sections);
}

/// E = 1/2 sum_i (v_i/N - p_i)^2 over every section.
inline double error_E(std::span<const double> v, const BinStats& stats) {
  if (v.size() != stats.sections()) throw DomainError("error_E: length mismatch");
  const double n = static_cast<double>(stats.total);
  double e = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] / n - stats.share[i];
    e += d * d;
  }
  return 0.5 * e;
}

/// Full-batch gradient of E. Each row l in section i contributes through
/// delta_i = (v_i/N - p_i)/N times the output derivative: xi in hard mode,
/// sigmoid'(s_l) in smooth mode. Every section takes part, including those
/// with m_i = 0.
inline Network compute_gradients(const Network& net, const BinnedRows& rows,
                                 std::span<const double> v, const BinStats& stats, double xi,
                                 GradientMode mode, OutputMode output = OutputMode::hard) {
  const std::size_t h = net.hidden(), r = net.inputs();
  const double n = static_cast<double>(stats.total);
  std::vector<double> delta(stats.sections());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    delta[i] = (v[i] / n - stats.share[i]) / n;
    if (!std::isfinite(delta[i]))
      throw NumericError("compute_gradients: non-finite error term in section " + std::to_string(i));
  }

  std::vector<double> w_in_colsum(h, 0.0);
  if (mode == GradientMode::paper_literal)
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t j = 0; j < h; ++j) w_in_colsum[j] += net.w_in(k, j);

  detail::ForwardCache fc(net, rows.x);
  Network g(r, h);
  std::vector<double> back(h);
  for (std::size_t l = 0; l < rows.x.rows(); ++l) {
    double slope = xi;
    if (output == OutputMode::smooth) {
      const double o = sigmoid(fc.sum[l]);
      slope = o * (1.0 - o);
    }
    const double c = delta[rows.section[l]] * slope;
    if (c == 0.0) continue;
    auto hid = fc.hidden.row(l);
    auto x = rows.x.row(l);
    g.b_out += c;
    for (std::size_t j = 0; j < h; ++j) {
      g.w_out[j] += c * hid[j];
      const double dsig = hid[j] * (1.0 - hid[j]);
      back[j] = c * dsig;
      g.b_hidden[j] += back[j] * (mode == GradientMode::corrected ? net.w_out[j] : w_in_colsum[j]);
    }
    for (std::size_t k = 0; k < r; ++k) {
      auto gk = g.w_in.row(k);
      for (std::size_t j = 0; j < h; ++j) {
        const double link = mode == GradientMode::corrected ? net.w_out[j] : net.w_in(k, j);
        gk[j] += back[j] * link * x[k];
      }
    }
  }
  if (!g.all_finite()) {
    // Locate the first section whose rows produce a non-finite term.
    for (std::size_t l = 0; l < rows.x.rows(); ++l)
      if (!std::isfinite(fc.sum[l]))
        throw NumericError("compute_gradients: non-finite output in section " +
                           std::to_string(rows.section[l]));
    throw NumericError("compute_gradients: non-finite gradient");
  }
  return g;
}

/// E for the smooth network (sigmoid output); the finite-difference target.
inline double smooth_error(const Network& net, const BinnedRows& rows, const BinStats& stats) {
  return error_E(accumulate_v(net, rows, stats.sections(), OutputMode::smooth), stats);
}

inline double stop_threshold(int effective_df, const TrainConfig& cfg) {
  if (cfg.epsilon_mode == EpsilonMode::df_mean) return static_cast<double>(effective_df);
  return stats::chi2_quantile(effective_df, cfg.significance_alpha);
}

/// Full-batch training. Each epoch evaluates v, E and eta on the current
/// network; training stops before updating once eta < epsilon and no positive
/// is predicted in a section with zero expectation (where the Pearson term
/// would be infinite).
inline TrainResult train(Network net, const BinnedRows& rows, const BinStats& stats,
                         const TrainConfig& cfg) {
  cfg.validate();
  TrainResult out;
  auto& trace = out.trace;
  trace.stop_reason = StopReason::max_epochs;

  const bool degenerate = chi_square_stat(stats.expected, stats.expected).degenerate;
  if (degenerate) trace.stop_reason = StopReason::degenerate;

  trace.epochs.reserve(std::min<std::size_t>(cfg.max_epochs, 1 << 16));
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    auto v = accumulate_v(net, rows, stats.sections());
    const auto chi = chi_square_stat(v, stats.expected);
    EpochRecord rec;
    rec.error = error_E(v, stats);
    rec.eta = chi.eta;
    rec.effective_df = chi.effective_df;
    rec.epsilon = degenerate ? 0.0 : stop_threshold(chi.effective_df, cfg);
    rec.unexpected = chi.unexpected;
    trace.epochs.push_back(rec);

    if (!degenerate && chi.eta < rec.epsilon && chi.unexpected == 0.0) {
      trace.stop_reason = StopReason::chi_square_pass;
      break;
    }
    auto g = compute_gradients(net, rows, v, stats, cfg.xi, cfg.gradient_mode);
    apply_update(net, g, cfg.rho);
    if (!net.all_finite() || net.max_abs() > cfg.divergence_limit)
      throw NumericError("train: parameters diverged at epoch " + std::to_string(epoch));
  }
  out.net = std::move(net);
  return out;
}

inline TrainResult train(const Matrix& x, std::span<const int> y, const BinGrid& grid,
                         const TrainConfig& cfg) {
  auto stats = compute_stats(grid, x, y);
  BinnedRows rows(x, grid);
  return train(init_network(x.cols(), cfg.hidden, cfg.seed, cfg.init_scale), rows, stats, cfg);
}

}  // namespace chi2nn
