#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mectrust/csv_loader.hpp"
#include "mectrust/manifest.hpp"
#include "mectrust/pipeline.hpp"
#include "mectrust/topology.hpp"

namespace mectrust {

// Surrogate for the IoT traffic datasets: several devices, each with its
// own benign operating point and attack signature, raw features on mixed
// scales plus one categorical protocol column.
struct SyntheticSpec {
  int devices = 9;
  std::size_t rows_per_device = 25000;
  std::size_t numeric_features = 20;
  double benign_fraction = 0.5;
  double separation = 0.35;       // length of the attack shift in unit space
  double spread = 0.12;           // per-feature standard deviation in unit space
  double device_variation = 0.8;  // how far device attack signatures deviate from the shared one
  double label_flip = 0.05;
};

std::vector<DeviceTable> generate_devices(const SyntheticSpec& spec, std::uint64_t seed);

// Schema matching generate_devices / write_devices_csv output.
Schema synthetic_schema(const SyntheticSpec& spec);

// One CSV per device: <dir>/<device>.csv plus <dir>/schema.json.
void write_devices_csv(const std::vector<DeviceTable>& devices, const Schema& schema, const std::filesystem::path& dir);

// Curation options used for the desk-scale surrogate experiments: default
// split ranges and community noise, and half of the nodes capped to at most
// 500 training samples.
PrepareOptions surrogate_prepare_options();

// Linearly separable data: one hidden hyperplane with a margin, per node
// train_per_node training and test_per_node test samples in [0,1]^d.
PartitionManifest separable_manifest(MecTopology& topology, std::size_t train_per_node, std::size_t test_per_node,
                                     std::size_t feature_dim, std::uint64_t seed, double margin = 0.05);

// Same dataset copied to every node.
PartitionManifest replicated_manifest(MecTopology& topology, const NodeDataset& data, std::size_t feature_dim);

}  // namespace mectrust
