#pragma once

// Conventional backpropagation baseline: sigmoid hidden layer, linear output,
// full-batch gradient descent on the mean squared error.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chi2nn/errors.hpp"
#include "chi2nn/matrix.hpp"
#include "chi2nn/network.hpp"

namespace chi2nn::bpnn {

struct Config {
  std::size_t hidden = 10;
  double rho = 0.1;
  double mse_goal = 1e-3;
  std::size_t max_epochs = 5000;
  std::uint64_t seed = 0;
  double init_scale = 0.5;
  double divergence_limit = 1e6;

  void validate() const {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("learning rate must be in (0,1)");
    if (!(mse_goal > 0.0)) throw ConfigError("mse_goal must be > 0");
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
  }
};

enum class StopReason { goal_reached, max_epochs };

inline std::string_view to_string(StopReason r) {
  return r == StopReason::goal_reached ? "mse_goal" : "max_epochs";
}

struct Trace {
  std::vector<double> mse;  // MSE before each epoch's update
  StopReason stop_reason = StopReason::max_epochs;
};

struct Result {
  Network net;
  Trace trace;
};

/// (1/n) sum (yhat - y)^2 with the linear output yhat.
inline double mse(const Network& net, const Matrix& x, std::span<const int> y) {
  std::vector<double> h(net.hidden());
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    hidden_forward(net, x.row(i), h);
    const double r = output_sum(net, h) - y[i];
    s += r * r;
  }
  return s / static_cast<double>(x.rows());
}

/// Exact gradient of mse(); also returns the MSE at `net`.
inline Network gradients(const Network& net, const Matrix& x, std::span<const int> y,
                         double* loss = nullptr) {
  const std::size_t n = x.rows(), h = net.hidden(), r = net.inputs();
  Network g(r, h);
  std::vector<double> hid(h), back(h);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    hidden_forward(net, x.row(i), hid);
    const double resid = output_sum(net, hid) - y[i];
    total += resid * resid;
    const double d = 2.0 * resid / static_cast<double>(n);
    g.b_out += d;
    for (std::size_t j = 0; j < h; ++j) {
      g.w_out[j] += d * hid[j];
      back[j] = d * net.w_out[j] * hid[j] * (1.0 - hid[j]);
      g.b_hidden[j] += back[j];
    }
    auto xi = x.row(i);
    for (std::size_t k = 0; k < r; ++k) {
      auto gk = g.w_in.row(k);
      for (std::size_t j = 0; j < h; ++j) gk[j] += back[j] * xi[k];
    }
  }
  if (loss) *loss = total / static_cast<double>(n);
  return g;
}

inline Result train(const Matrix& x, std::span<const int> y, const Config& cfg) {
  cfg.validate();
  if (x.rows() != y.size() || x.rows() == 0) throw DomainError("bpnn::train: bad training set");
  for (int label : y)
    if (label != 0 && label != 1) throw DomainError("bpnn::train: labels must be 0 or 1");

  Result out;
  out.net = init_network(x.cols(), cfg.hidden, cfg.seed, cfg.init_scale);
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double loss = 0.0;
    auto g = gradients(out.net, x, y, &loss);
    out.trace.mse.push_back(loss);
    if (loss <= cfg.mse_goal) {
      out.trace.stop_reason = StopReason::goal_reached;
      break;
    }
    apply_update(out.net, g, cfg.rho);
    if (!out.net.all_finite() || out.net.max_abs() > cfg.divergence_limit)
      throw NumericError("bpnn::train: parameters diverged at epoch " + std::to_string(epoch));
  }
  return out;
}

// Linear output thresholded at 0.5, the same boundary rule as the chi-square
// network.
inline int predict(const Network& net, std::span<const double> x) {
  return chi2nn::predict(net, x);
}

inline std::vector<int> predict(const Network& net, const Matrix& x) {
  return chi2nn::predict(net, x);
}

}  // namespace chi2nn::bpnn
