#include "mectrust/svm_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mectrust/errors.hpp"

namespace mectrust {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

PackedSamples::PackedSamples(std::span<const Sample> samples, std::size_t feature_dim)
    : dim_(feature_dim + 1) {
  values_.reserve(samples.size() * dim_);
  labels_.reserve(samples.size());
  sq_norms_.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.features.size() != feature_dim) throw std::invalid_argument("sample dimension mismatch");
    double nrm = 1.0;
    for (double v : s.features) {
      values_.push_back(v);
      nrm += v * v;
    }
    values_.push_back(1.0);
    labels_.push_back(static_cast<double>(s.label));
    sq_norms_.push_back(nrm);
  }
}

ProxSvmSolver::ProxSvmSolver(PackedSamples data, double C)
    : data_(std::move(data)), cost_(C), beta_(data_.rows(), 0.0), order_(data_.rows()) {
  if (!(C > 0.0)) throw std::invalid_argument("SVM cost must be positive");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

void ProxSvmSolver::primal_from_dual(double alpha, std::span<const double> center, std::span<double> w) const {
  std::copy(center.begin(), center.end(), w.begin());
  const double inv = 1.0 / alpha;
  for (std::size_t s = 0; s < data_.rows(); ++s) {
    if (beta_[s] == 0.0) continue;
    const double coef = beta_[s] * data_.label(s) * inv;
    const auto x = data_.row(s);
    for (std::size_t k = 0; k < x.size(); ++k) w[k] += coef * x[k];
  }
}

// gap = P(w) - D(beta) with w the primal image of beta:
//   P = (alpha/2)||w-c||^2 + C sum hinge
//   D = sum beta_s (1 - y_s x_s^T c) - (alpha/2)||w-c||^2
double ProxSvmSolver::gap_at(double alpha, std::span<const double> center, std::span<const double> w,
                             double& hinge_sum) const {
  double sq = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sq += (w[k] - center[k]) * (w[k] - center[k]);
  hinge_sum = 0.0;
  double linear = 0.0;
  for (std::size_t s = 0; s < data_.rows(); ++s) {
    const auto x = data_.row(s);
    const double y = data_.label(s);
    hinge_sum += std::max(0.0, 1.0 - y * dot(w, x));
    if (beta_[s] != 0.0) linear += beta_[s] * (1.0 - y * dot(center, x));
  }
  return std::max(0.0, cost_ * hinge_sum - linear + alpha * sq);
}

ProxSvmSolution ProxSvmSolver::solve(double alpha, std::span<const double> center, double offset, double tol,
                                     int max_epochs, std::span<double> w) {
  if (!(alpha > 0.0)) throw std::invalid_argument("proximal weight must be positive");
  if (center.size() != data_.dim() && data_.rows() > 0) throw std::invalid_argument("center dimension mismatch");
  if (w.size() != center.size()) throw std::invalid_argument("output dimension mismatch");

  auto objective = [&](double hinge_sum) {
    double sq = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) sq += (w[k] - center[k]) * (w[k] - center[k]);
    return 0.5 * alpha * sq + cost_ * hinge_sum + offset;
  };

  ProxSvmSolution out;
  if (data_.rows() == 0) {
    std::copy(center.begin(), center.end(), w.begin());
    out.objective = offset;
    return out;
  }

  for (auto& b : beta_) b = std::clamp(b, 0.0, cost_);
  for (int epoch = 0;; ++epoch) {
    primal_from_dual(alpha, center, w);
    double hinge_sum = 0.0;
    const double gap = gap_at(alpha, center, w, hinge_sum);
    const double obj = objective(hinge_sum);
    out.objective = obj;
    out.gap = gap;
    out.epochs = epoch;
    if (gap <= tol * obj) return out;
    if (epoch >= max_epochs) {
      const double achieved = obj > 0.0 ? gap / obj : gap;
      char msg[160];
      std::snprintf(msg, sizeof msg, "w-update did not reach relative gap %g within %d epochs (achieved %g)", tol,
                    max_epochs, achieved);
      throw ConvergenceError(msg, achieved);
    }
    std::shuffle(order_.begin(), order_.end(), rng_);
    for (std::size_t s : order_) {
      const auto x = data_.row(s);
      const double y = data_.label(s);
      const double grad = 1.0 - y * dot(w, x);
      const double next = std::clamp(beta_[s] + alpha * grad / data_.sq_norm(s), 0.0, cost_);
      const double delta = next - beta_[s];
      if (delta == 0.0) continue;
      beta_[s] = next;
      const double coef = delta * y / alpha;
      for (std::size_t k = 0; k < x.size(); ++k) w[k] += coef * x[k];
    }
  }
}

}  // namespace mectrust
