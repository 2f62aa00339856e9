#pragma once

#include <cstdint>
#include <vector>

namespace mectrust {

inline constexpr int kBenign = 1;
inline constexpr int kHarmful = -1;

// One labeled trust transaction.
struct Sample {
  std::vector<double> features;
  int label = kBenign;
  // Service split the sample was drawn from; -1 when unknown.
  std::int64_t service_id = -1;

  bool operator==(const Sample&) const = default;
};

}  // namespace mectrust
