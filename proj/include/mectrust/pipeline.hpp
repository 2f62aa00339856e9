#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mectrust/csv_loader.hpp"
#include "mectrust/manifest.hpp"
#include "mectrust/partition.hpp"
#include "mectrust/topology.hpp"

namespace mectrust {

// All rows collected from one device (sensor service source).
struct DeviceTable {
  std::string name;
  RawTable table;
};

// Reads every CSV under dir. Devices are, in order of precedence: groups of
// the schema's device_column, immediate subdirectories, or individual files.
// Devices are returned sorted by name.
std::vector<DeviceTable> load_devices(const std::filesystem::path& dir, const Schema& schema);

struct SparseNodes {
  double node_fraction = 0.5;
  SizeRange train_range{10, 500};
};

struct PrepareOptions {
  std::string dataset_name = "dataset";
  SplitOptions splits;
  int communities = 4;
  CommunityMode community_mode = CommunityMode::by_device;
  std::vector<double> community_sigmas;  // empty: default_community_sigmas
  AssignmentOptions assignment;
  std::optional<SparseNodes> sparse;
};

// Full curation: per-device service splits, community ids, node placement,
// one-hot and min-max fitted on the pooled training rows only, community
// noise, and finally per-node datasets. Also sets the topology's sample
// counts.
PartitionManifest prepare_partition(const std::vector<DeviceTable>& devices, MecTopology& topology,
                                    const PrepareOptions& options, std::uint64_t seed);

}  // namespace mectrust
