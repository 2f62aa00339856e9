#include "mectrust/encoding.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace mectrust {

FeatureTable one_hot_encode(const RawTable& table, bool fit, std::vector<CategoricalEncoding>& encoding_map) {
  std::vector<const RawColumn*> categorical;
  for (const auto& c : table.columns) {
    if (c.role == ColumnRole::categorical) categorical.push_back(&c);
  }

  if (fit) {
    encoding_map.clear();
    for (const auto* col : categorical) {
      CategoricalEncoding enc{col->name, {}};
      std::unordered_map<std::string, std::size_t> seen;
      for (const auto& row : table.rows) {
        const auto& v = row.categorical[col->slot];
        if (seen.emplace(v, enc.categories.size()).second) enc.categories.push_back(v);
      }
      encoding_map.push_back(std::move(enc));
    }
  } else {
    if (!categorical.empty() && encoding_map.empty()) {
      throw std::invalid_argument("one-hot apply needs a fitted encoding map");
    }
  }

  // Per categorical column: value -> offset within its block.
  std::vector<std::unordered_map<std::string, std::size_t>> lookup;
  std::vector<std::size_t> block_size;
  for (const auto* col : categorical) {
    auto it = std::find_if(encoding_map.begin(), encoding_map.end(),
                           [&](const CategoricalEncoding& e) { return e.column == col->name; });
    if (it == encoding_map.end()) throw std::invalid_argument("encoding map lacks column '" + col->name + "'");
    std::unordered_map<std::string, std::size_t> m;
    for (std::size_t k = 0; k < it->categories.size(); ++k) m.emplace(it->categories[k], k);
    lookup.push_back(std::move(m));
    block_size.push_back(it->categories.size());
  }

  FeatureTable out;
  for (const auto& c : table.columns) {
    if (c.role == ColumnRole::numeric) {
      out.names.push_back(c.name);
    } else {
      const auto& enc = *std::find_if(encoding_map.begin(), encoding_map.end(),
                                      [&](const CategoricalEncoding& e) { return e.column == c.name; });
      for (const auto& cat : enc.categories) out.names.push_back(c.name + "=" + cat);
    }
  }

  out.rows.reserve(table.rows.size());
  out.labels.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::vector<double> enc;
    enc.reserve(out.names.size());
    std::size_t ci = 0;
    for (const auto& c : table.columns) {
      if (c.role == ColumnRole::numeric) {
        enc.push_back(row.numeric[c.slot]);
        continue;
      }
      const std::size_t base = enc.size();
      enc.resize(base + block_size[ci], 0.0);
      auto hit = lookup[ci].find(row.categorical[c.slot]);
      if (hit != lookup[ci].end()) enc[base + hit->second] = 1.0;
      ++ci;
    }
    out.rows.push_back(std::move(enc));
    out.labels.push_back(row.label);
  }
  return out;
}

void min_max_scale(FeatureTable& table, bool fit, std::vector<ScalingParam>& params) {
  const std::size_t cols = table.names.size();
  if (fit) {
    params.assign(cols, ScalingParam{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (const auto& row : table.rows) {
      for (std::size_t k = 0; k < cols; ++k) {
        params[k].min = std::min(params[k].min, row[k]);
        params[k].max = std::max(params[k].max, row[k]);
      }
    }
    if (table.rows.empty()) std::fill(params.begin(), params.end(), ScalingParam{0.0, 0.0});
  }
  if (params.size() != cols) throw std::invalid_argument("scaling params do not match column count");
  for (const auto& p : params) {
    if (p.max < p.min) throw std::invalid_argument("scaling param has max < min");
  }
  for (auto& row : table.rows) {
    for (std::size_t k = 0; k < cols; ++k) {
      const double span = params[k].max - params[k].min;
      row[k] = span > 0.0 ? std::clamp((row[k] - params[k].min) / span, 0.0, 1.0) : 0.0;
    }
  }
}

}  // namespace mectrust
