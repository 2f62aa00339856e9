#include "mectrust/trust_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mectrust {

double SvmParams::cost_for(std::size_t n) const {
  if (scaling == CostScaling::sum || n == 0) return C;
  return C / static_cast<double>(n);
}

void SvmParams::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("SVM cost C must be positive");
}

double score(const TrustModel& model, std::span<const double> x) {
  if (model.w.size() != x.size() + 1) {
    throw std::invalid_argument("model dimension " + std::to_string(model.w.size()) +
                                " does not match feature dimension " + std::to_string(x.size()) + " + 1");
  }
  double s = model.w.back();
  for (std::size_t k = 0; k < x.size(); ++k) s += model.w[k] * x[k];
  return s;
}

int classify(const TrustModel& model, std::span<const double> x) {
  return score(model, x) > 0.0 ? kBenign : kHarmful;
}

double local_objective(const TrustModel& model, std::span<const Sample> samples, double C) {
  double reg = 0.0;
  for (double v : model.w) reg += v * v;
  double hinge = 0.0;
  for (const auto& s : samples) {
    hinge += std::max(0.0, 1.0 - static_cast<double>(s.label) * score(model, s.features));
  }
  return 0.5 * reg + C * hinge;
}

}  // namespace mectrust
