#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mectrust/sample.hpp"

namespace mectrust {

// Linear trust predictor over [x; 1]. The last weight is the bias and is
// regularized like every other component.
struct TrustModel {
  std::vector<double> w;

  TrustModel() = default;
  explicit TrustModel(std::vector<double> weights) : w(std::move(weights)) {}
  static TrustModel zeros(std::size_t feature_dim) { return TrustModel(std::vector<double>(feature_dim + 1, 0.0)); }

  std::size_t feature_dim() const { return w.empty() ? 0 : w.size() - 1; }
};

// How the hinge weight C is applied to a node with n training samples.
enum class CostScaling {
  sum,   // C applies to each sample as given
  mean,  // C / n per sample, so the data term is a mean
};

struct SvmParams {
  double C = 1.0;
  CostScaling scaling = CostScaling::mean;

  // Per-sample hinge weight for a training set of size n.
  double cost_for(std::size_t n) const;
  void validate() const;
};

// BTrust: w^T [x; 1].
double score(const TrustModel& model, std::span<const double> x);

// +1 (benign) when score > 0, otherwise -1 (harmful).
int classify(const TrustModel& model, std::span<const double> x);

// 0.5 ||w||^2 + C * sum_s max(0, 1 - y_s score(w, x_s)). C is used as given,
// callers resolve per-node scaling beforehand.
double local_objective(const TrustModel& model, std::span<const Sample> samples, double C);

}  // namespace mectrust
