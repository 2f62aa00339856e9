#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mectrust/sample.hpp"

namespace mectrust {

enum class ServiceKind { known, lesser_known };

template <typename Row>
struct BasicServiceSplit {
  std::int64_t service_id = 0;
  ServiceKind kind = ServiceKind::known;
  int community_id = 0;
  int device_id = 0;
  std::vector<Row> samples;
};

using ServiceSplit = BasicServiceSplit<Sample>;

struct NodeDataset {
  int node_id = 0;
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::vector<std::int64_t> services;
};

struct ScalingParam {
  double min = 0.0;
  double max = 0.0;

  bool operator==(const ScalingParam&) const = default;
};

// Fitted categories per categorical column, in first-appearance order.
struct CategoricalEncoding {
  std::string column;
  std::vector<std::string> categories;

  bool operator==(const CategoricalEncoding&) const = default;
};

struct SplitRecord {
  std::int64_t service_id = 0;
  ServiceKind kind = ServiceKind::known;
  int community_id = 0;
  int device_id = 0;
  int node_id = 0;
  std::size_t size = 0;
  double noise_sigma = 0.0;
};

struct PartitionManifest {
  std::string dataset_name;
  std::size_t feature_dim = 0;
  std::vector<std::string> feature_names;
  std::vector<ScalingParam> scaling_params;
  std::vector<CategoricalEncoding> encoding_map;
  std::vector<SplitRecord> splits;
  std::vector<NodeDataset> node_datasets;
  std::uint64_t seed = 0;

  std::size_t pooled_train_count() const {
    std::size_t n = 0;
    for (const auto& nd : node_datasets) n += nd.train.size();
    return n;
  }
};

}  // namespace mectrust
