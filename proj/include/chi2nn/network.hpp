#pragma once

// Single-hidden-layer network shared by the chi-square classifier and the MSE
// baseline: sigmoid hidden units, one output unit thresholded at 0.5.

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "chi2nn/errors.hpp"
#include "chi2nn/matrix.hpp"
#include "chi2nn/rng.hpp"

namespace chi2nn {

inline constexpr double kDecisionThreshold = 0.5;

enum class ModelKind { chi2nn, bpnn };

inline std::string_view to_string(ModelKind k) {
  return k == ModelKind::chi2nn ? "chi2nn" : "bpnn";
}

// Parameters of an r-h-1 network. Also used to hold gradients, which have
// the same shape.
struct Network {
  Matrix w_in;                  // r x h, w_in(k, j) connects input k to hidden j
  std::vector<double> b_hidden; // h hidden thresholds
  std::vector<double> w_out;    // h hidden-to-output weights
  double b_out = 0.0;           // output threshold

  Network() = default;
  Network(std::size_t inputs, std::size_t hidden)
      : w_in(inputs, hidden), b_hidden(hidden, 0.0), w_out(hidden, 0.0) {}

  std::size_t inputs() const { return w_in.rows(); }
  std::size_t hidden() const { return w_in.cols(); }
  std::size_t parameter_count() const { return inputs() * hidden() + 2 * hidden() + 1; }

  // Visits every parameter in serialisation order: w_in row-major, hidden
  // thresholds, output weights, output threshold.
  template <typename F>
  void for_each(F&& f) {
    for (double& v : w_in.data()) f(v);
    for (double& v : b_hidden) f(v);
    for (double& v : w_out) f(v);
    f(b_out);
  }
  template <typename F>
  void for_each(F&& f) const {
    for (double v : w_in.data()) f(v);
    for (double v : b_hidden) f(v);
    for (double v : w_out) f(v);
    f(b_out);
  }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for_each([&](double v) { out.push_back(v); });
    return out;
  }

  bool all_finite() const {
    bool ok = true;
    for_each([&](double v) { ok = ok && std::isfinite(v); });
    return ok;
  }

  double max_abs() const {
    double m = 0.0;
    for_each([&](double v) { m = std::max(m, std::fabs(v)); });
    return m;
  }

  bool operator==(const Network&) const = default;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Every parameter drawn i.i.d. uniform on [-scale, +scale].
inline Network init_network(std::size_t inputs, std::size_t hidden, std::uint64_t seed,
                            double init_scale = 0.5) {
  if (inputs < 1 || hidden < 1) throw DomainError("init_network: r and h must be >= 1");
  Network net(inputs, hidden);
  Rng rng(seed);
  net.for_each([&](double& v) { v = rng.uniform(-init_scale, init_scale); });
  return net;
}

/// Hidden activations sigmoid(sum_k x_k w_in(k,j) + b_j).
inline void hidden_forward(const Network& net, std::span<const double> x, std::span<double> out) {
  const std::size_t h = net.hidden();
  for (std::size_t j = 0; j < h; ++j) out[j] = net.b_hidden[j];
  for (std::size_t k = 0; k < net.inputs(); ++k) {
    const double xk = x[k];
    auto w = net.w_in.row(k);
    for (std::size_t j = 0; j < h; ++j) out[j] += xk * w[j];
  }
  for (std::size_t j = 0; j < h; ++j) out[j] = sigmoid(out[j]);
}

inline std::vector<double> hidden_forward(const Network& net, std::span<const double> x) {
  std::vector<double> out(net.hidden());
  hidden_forward(net, x, out);
  return out;
}

/// Output pre-activation sum_j w_out_j hidden_j + b_out.
inline double output_sum(const Network& net, std::span<const double> hidden) {
  double s = net.b_out;
  for (std::size_t j = 0; j < net.hidden(); ++j) s += net.w_out[j] * hidden[j];
  return s;
}

/// Hard threshold: 1 iff the output sum exceeds 0.5.
inline int threshold_output(double s) { return s > kDecisionThreshold ? 1 : 0; }

inline int output_forward(const Network& net, std::span<const double> hidden) {
  return threshold_output(output_sum(net, hidden));
}

inline int predict(const Network& net, std::span<const double> x) {
  return output_forward(net, hidden_forward(net, x));
}

inline std::vector<int> predict(const Network& net, const Matrix& x) {
  std::vector<int> out(x.rows());
  std::vector<double> h(net.hidden());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    hidden_forward(net, x.row(i), h);
    out[i] = output_forward(net, h);
  }
  return out;
}

inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (truth.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

/// Gradient step: every parameter moves by -rate times its gradient.
inline void apply_update(Network& net, const Network& grad, double rate) {
  auto g = grad.flatten();
  std::size_t i = 0;
  net.for_each([&](double& v) { v -= rate * g[i++]; });
}

}  // namespace chi2nn
