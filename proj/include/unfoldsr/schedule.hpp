#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "unfoldsr/weights.hpp"

namespace unfoldsr {

/// Per-iteration hyper-parameters of the unfolded loop: alpha_k weights the
/// data term (alpha_k = mu_k sigma^2), beta_k is the denoiser noise level
/// (beta_k = sqrt(lambda / mu_k)), which makes alpha_k beta_k^2 = lambda
/// sigma^2 an exact identity of analytic schedules.
struct HyperSchedule {
  std::vector<double> alphas;
  std::vector<double> betas;
  double lambda_ = 0.0;
  double sigma = 0.0;     // effective noise std in [0,1] units

  int iterations() const { return static_cast<int>(alphas.size()); }

  void validate() const {
    if (alphas.empty() || alphas.size() != betas.size())
      throw std::invalid_argument("HyperSchedule: empty or mismatched alpha/beta");
    for (double v : alphas)
      if (!(v >= 1e-6)) throw std::invalid_argument("HyperSchedule: alpha below the 1e-6 floor");
    for (double v : betas)
      if (!(v >= 1e-6)) throw std::invalid_argument("HyperSchedule: beta below the 1e-6 floor");
  }
};

/// Analytic stand-in for the learned hyper-parameter module: beta_k descends
/// log-spaced from beta_start to max(sigma, 0.255)/255 (the usual
/// strong-to-weak denoiser sweep), mu_k = lambda / beta_k^2 increases, and
/// alpha_k = mu_k sigma_eff^2.
///
/// sigma_eff is sigma floored at max(1e-4, beta_start sqrt(1e-6/lambda)); the
/// second term raises the floor exactly enough that the smallest alpha still
/// clears 1e-6, so the alpha beta^2 identity survives verbatim for noise-free
/// inputs instead of being broken by a clamp. The scale factor does not enter
/// the analytic formula; it is accepted for interface parity with the learned
/// module.
inline HyperSchedule analytic_schedule(double sigma255, int s, int iterations = 8,
                                       double beta_start255 = 49.0, double lambda = 1.0 / 3.0) {
  (void)s;
  if (iterations < 1) throw std::invalid_argument("analytic_schedule: iterations must be >= 1");
  if (sigma255 < 0) throw std::invalid_argument("analytic_schedule: sigma must be >= 0");
  if (lambda <= 0) throw std::invalid_argument("analytic_schedule: lambda must be > 0");
  if (!(beta_start255 > std::max(sigma255, 0.1)))
    throw std::invalid_argument("analytic_schedule: beta_start must exceed max(sigma, 0.1)");

  const double beta_start = beta_start255 / 255.0;
  const double beta_end = std::max(sigma255, 0.255) / 255.0;
  if (!(beta_start > beta_end))
    throw std::invalid_argument("analytic_schedule: beta range is empty (beta_start <= beta_end)");

  // 1.05 adds rounding headroom so the smallest alpha cannot land a few ulp
  // below the floor.
  const double sigma_eff =
      std::max({sigma255 / 255.0, 1e-4, beta_start * std::sqrt(1.05e-6 / lambda)});

  HyperSchedule sched;
  sched.lambda_ = lambda;
  sched.sigma = sigma_eff;
  sched.alphas.resize(iterations);
  sched.betas.resize(iterations);
  for (int k = 0; k < iterations; ++k) {
    // Endpoints are taken verbatim so they are exact in floating point.
    double beta;
    if (k == iterations - 1) {
      beta = beta_end;
    } else if (k == 0) {
      beta = beta_start;
    } else {
      const double t = static_cast<double>(k) / (iterations - 1);
      beta = std::exp(std::log(beta_start) + t * (std::log(beta_end) - std::log(beta_start)));
    }
    const double mu = lambda / (beta * beta);
    sched.betas[k] = beta;
    sched.alphas[k] = mu * sigma_eff * sigma_eff;
  }
  sched.validate();
  return sched;
}

/// Manifest of the learned hyper-parameter module: three fully connected
/// layers 2 -> 64 -> 64 -> 2K with ReLU, ReLU, Softplus activations.
inline std::vector<TensorSpec> mlp_manifest(int iterations = 8) {
  if (iterations < 1) throw std::invalid_argument("mlp_manifest: iterations must be >= 1");
  return {
      {"fc1.weight", {64, 2}},  {"fc1.bias", {64}},
      {"fc2.weight", {64, 64}}, {"fc2.bias", {64}},
      {"fc3.weight", {2 * iterations, 64}}, {"fc3.bias", {2 * iterations}},
  };
}

/// Forward pass of the learned module on input (sigma, s). Softplus plus
/// 1e-6 keeps every output strictly positive and clear of the division
/// guard. Output layout: first K values are alpha, last K are beta. Learned
/// schedules need not be monotone, so only positivity is enforced here.
inline HyperSchedule mlp_schedule(double sigma255, int s, const WeightStore& store) {
  const int out_dim = store.has("fc3.bias") ? store.get("fc3.bias").shape[0] : 0;
  if (out_dim < 2 || out_dim % 2 != 0)
    throw std::runtime_error("mlp_schedule: fc3 output dimension must be even and positive");
  const int iterations = out_dim / 2;
  validate_weights(store, mlp_manifest(iterations));

  const auto softplus = [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); };
  const auto dense = [&](const std::string& name, const std::vector<double>& in, int out_n) {
    const Tensor& w = store.get(name + ".weight");
    const Tensor& b = store.get(name + ".bias");
    std::vector<double> out(out_n);
    for (int o = 0; o < out_n; ++o) {
      double acc = b.values[o];
      for (std::size_t i = 0; i < in.size(); ++i)
        acc += static_cast<double>(w.values[o * in.size() + i]) * in[i];
      out[o] = acc;
    }
    return out;
  };

  std::vector<double> h = dense("fc1", {sigma255 / 255.0, static_cast<double>(s)}, 64);
  for (double& v : h) v = std::max(v, 0.0);
  h = dense("fc2", h, 64);
  for (double& v : h) v = std::max(v, 0.0);
  h = dense("fc3", h, out_dim);

  HyperSchedule sched;
  sched.lambda_ = 0.0;   // not defined for learned schedules
  sched.sigma = sigma255 / 255.0;
  sched.alphas.assign(h.begin(), h.begin() + iterations);
  sched.betas.assign(h.begin() + iterations, h.end());
  for (double& v : sched.alphas) v = softplus(v) + 1e-6;
  for (double& v : sched.betas) v = softplus(v) + 1e-6;
  sched.validate();
  return sched;
}

/// CSV dump (k, alpha_k, beta_k) for schedule inspection.
inline std::string schedule_to_csv(const HyperSchedule& sched) {
  std::ostringstream out;
  out << "k,alpha,beta\n";
  out.precision(17);
  for (int k = 0; k < sched.iterations(); ++k)
    out << (k + 1) << "," << sched.alphas[k] << "," << sched.betas[k] << "\n";
  return out.str();
}

}  // namespace unfoldsr
