#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "mectrust/sample.hpp"

namespace mectrust {

// Row-major copy of a training set with the constant-1 bias column appended.
class PackedSamples {
 public:
  PackedSamples() = default;
  PackedSamples(std::span<const Sample> samples, std::size_t feature_dim);

  std::size_t rows() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t s) const { return {values_.data() + s * dim_, dim_}; }
  double label(std::size_t s) const { return labels_[s]; }
  double sq_norm(std::size_t s) const { return sq_norms_[s]; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::vector<double> labels_;
  std::vector<double> sq_norms_;
};

struct ProxSvmSolution {
  double objective = 0.0;  // value of the full objective including offset
  double gap = 0.0;        // certified primal-dual gap (absolute)
  int epochs = 0;
};

// Solves
//   min_w (alpha/2) ||w - center||^2 + C sum_s max(0, 1 - y_s w^T x_s) + offset
// by dual coordinate ascent over the box 0 <= beta_s <= C, with
//   w = center + (1/alpha) sum_s beta_s y_s x_s.
// The dual iterate persists between calls, so repeated solves with a slowly
// moving center are warm-started. Stops once gap <= tol * objective.
class ProxSvmSolver {
 public:
  ProxSvmSolver() = default;
  ProxSvmSolver(PackedSamples data, double C);

  const PackedSamples& data() const { return data_; }
  double cost() const { return cost_; }

  // Writes the minimizer into w. Throws ConvergenceError when max_epochs
  // sweeps do not reach the requested relative gap.
  ProxSvmSolution solve(double alpha, std::span<const double> center, double offset, double tol,
                        int max_epochs, std::span<double> w);

  void reset() {
    std::fill(beta_.begin(), beta_.end(), 0.0);
    rng_.seed(0x5eed);
  }

 private:
  double gap_at(double alpha, std::span<const double> center, std::span<const double> w, double& hinge_sum) const;
  void primal_from_dual(double alpha, std::span<const double> center, std::span<double> w) const;

  PackedSamples data_;
  double cost_ = 0.0;
  std::vector<double> beta_;
  // Coordinate order is reshuffled every epoch from a fixed-seed generator,
  // so runs are reproducible.
  std::vector<std::size_t> order_;
  std::mt19937_64 rng_{0x5eed};
};

}  // namespace mectrust
