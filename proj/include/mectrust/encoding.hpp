#pragma once

#include <string>
#include <vector>

#include "mectrust/csv_loader.hpp"
#include "mectrust/manifest.hpp"

namespace mectrust {

// Dense numeric table produced by one-hot encoding.
struct FeatureTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

// Expands each categorical column in place into one binary column per fitted
// category (first-appearance order). Values unseen at fit time encode as all
// zeros. With fit = true the map is rebuilt from this table; otherwise it
// must cover every categorical column.
FeatureTable one_hot_encode(const RawTable& table, bool fit, std::vector<CategoricalEncoding>& encoding_map);

// (v - min) / (max - min) per column, clipped to [0, 1]; constant columns map
// to 0. With fit = true params are recomputed from this table.
void min_max_scale(FeatureTable& table, bool fit, std::vector<ScalingParam>& params);

}  // namespace mectrust
