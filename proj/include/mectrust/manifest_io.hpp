#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "mectrust/manifest.hpp"

namespace mectrust {

// Per-node sample files hold one sample per row as little-endian float64:
// label, service id, then feature_dim features.
std::string encode_samples(std::span<const Sample> samples);
std::vector<Sample> decode_samples(const std::string& bytes, std::size_t feature_dim);

// Manifest metadata (everything except the samples themselves).
nlohmann::json manifest_to_json(const PartitionManifest& manifest);

// Writes manifest.json plus node_NNNN_{train,test}.bin into dir.
void write_manifest(const PartitionManifest& manifest, const std::filesystem::path& dir);
PartitionManifest read_manifest(const std::filesystem::path& dir);

// Hex SHA-256 over the canonical serialization: compact manifest JSON
// followed by every node's train and test bytes in node order.
std::string manifest_digest(const PartitionManifest& manifest);

}  // namespace mectrust
