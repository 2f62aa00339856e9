#include "mectrust/pipeline.hpp"

#include <algorithm>
#include <map>

#include "mectrust/encoding.hpp"
#include "mectrust/errors.hpp"

namespace fs = std::filesystem;

namespace mectrust {

namespace {

std::vector<fs::path> csv_files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string path_label(const fs::path& file, const fs::path& root) {
  auto rel = fs::relative(file, root);
  rel.replace_extension();
  auto s = rel.generic_string();
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

RawTable load_group(const std::vector<fs::path>& files, const fs::path& root, const Schema& schema) {
  RawTable merged;
  merged.columns = raw_layout(schema);
  for (const auto& f : files) {
    std::optional<std::string> label;
    if (schema.label_source == LabelSource::path) label = path_label(f, root);
    auto t = load_csv(f, schema, label);
    for (auto& r : t.rows) merged.rows.push_back(std::move(r));
  }
  return merged;
}

// Encodes + scales raw rows with already fitted maps.
std::vector<Sample> encode_rows(const std::vector<RawRow>& rows, const std::vector<RawColumn>& layout,
                                std::vector<CategoricalEncoding>& enc, std::vector<ScalingParam>& scale) {
  RawTable t{layout, rows};
  auto ft = one_hot_encode(t, false, enc);
  min_max_scale(ft, false, scale);
  std::vector<Sample> out;
  out.reserve(ft.rows.size());
  for (std::size_t r = 0; r < ft.rows.size(); ++r) out.push_back(Sample{std::move(ft.rows[r]), ft.labels[r], -1});
  return out;
}

}  // namespace

std::vector<DeviceTable> load_devices(const fs::path& dir, const Schema& schema) {
  if (!fs::is_directory(dir)) throw IoError("data directory not found: " + dir.string());
  std::vector<DeviceTable> out;

  if (schema.device_column) {
    auto all = load_group(csv_files_under(dir), dir, schema);
    std::map<std::string, std::vector<RawRow>> groups;
    for (auto& r : all.rows) groups[r.device].push_back(std::move(r));
    for (auto& [name, rows] : groups) out.push_back(DeviceTable{name, RawTable{all.columns, std::move(rows)}});
    return out;
  }

  std::vector<fs::path> subdirs;
  std::vector<fs::path> top_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
    if (entry.is_regular_file() && entry.path().extension() == ".csv") top_files.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  std::sort(top_files.begin(), top_files.end());
  if (!subdirs.empty()) {
    for (const auto& d : subdirs) {
      auto files = csv_files_under(d);
      if (files.empty()) continue;
      out.push_back(DeviceTable{d.filename().string(), load_group(files, d, schema)});
    }
  } else {
    for (const auto& f : top_files) out.push_back(DeviceTable{f.stem().string(), load_group({f}, dir, schema)});
  }
  if (out.empty()) throw IoError("no CSV files under " + dir.string());
  return out;
}

PartitionManifest prepare_partition(const std::vector<DeviceTable>& devices, MecTopology& topology,
                                    const PrepareOptions& options, std::uint64_t seed) {
  if (devices.empty()) throw std::invalid_argument("no devices to prepare");
  const auto layout = devices.front().table.columns;
  for (const auto& d : devices) {
    if (d.table.columns.size() != layout.size()) throw ValidationError("devices disagree on column layout");
  }

  // 1. Service splits over raw rows, one sub-generator per device.
  std::vector<BasicServiceSplit<RawRow>> raw_splits;
  std::int64_t next_id = 0;
  for (std::size_t d = 0; d < devices.size(); ++d) {
    auto splits = split_into_services(devices[d].table.rows, options.splits, seed, static_cast<int>(d), next_id);
    next_id += static_cast<std::int64_t>(splits.size());
    for (auto& s : splits) raw_splits.push_back(std::move(s));
  }
  if (raw_splits.empty()) throw ValidationError("no device holds enough rows for a single service split");
  assign_communities(raw_splits, options.communities, seed, options.community_mode);

  // 2. Placement decides train/test membership before any fitting.
  const auto placement = plan_assignment(std::span<const BasicServiceSplit<RawRow>>(raw_splits), topology, seed,
                                         options.assignment);

  // 3. Fit encoding and scaling on the pooled training rows.
  RawTable train_rows{layout, {}};
  for (const auto& node : placement.train) {
    for (const auto& ref : node) train_rows.rows.push_back(raw_splits[ref.split].samples[ref.row]);
  }
  std::vector<CategoricalEncoding> enc;
  std::vector<ScalingParam> scale;
  auto fitted = one_hot_encode(train_rows, true, enc);
  min_max_scale(fitted, true, scale);
  train_rows.rows.clear();

  // 4. Transform every split, then add community noise.
  std::vector<ServiceSplit> splits;
  splits.reserve(raw_splits.size());
  for (const auto& rs : raw_splits) {
    ServiceSplit s;
    s.service_id = rs.service_id;
    s.kind = rs.kind;
    s.community_id = rs.community_id;
    s.device_id = rs.device_id;
    s.samples = encode_rows(rs.samples, layout, enc, scale);
    splits.push_back(std::move(s));
  }
  auto sigmas = options.community_sigmas.empty() ? default_community_sigmas(options.communities)
                                                 : options.community_sigmas;
  if (sigmas.size() < static_cast<std::size_t>(options.communities)) {
    throw std::invalid_argument("need one noise level per community");
  }
  // One-hot columns stay exact so every encoded block keeps summing to 0 or 1.
  std::vector<bool> noisy;
  for (const auto& col : layout) {
    if (col.role == ColumnRole::numeric) {
      noisy.push_back(true);
    } else if (col.role == ColumnRole::categorical) {
      noisy.insert(noisy.end(), enc.at(col.slot).categories.size(), false);
    }
  }
  if (noisy.size() != fitted.names.size()) throw std::logic_error("noise mask does not match encoded layout");
  apply_community_noise(splits, sigmas, seed, noisy);

  PartitionManifest manifest;
  manifest.dataset_name = options.dataset_name;
  manifest.seed = seed;
  manifest.feature_dim = fitted.names.size();
  manifest.feature_names = fitted.names;
  manifest.scaling_params = scale;
  manifest.encoding_map = enc;
  for (std::size_t s = 0; s < splits.size(); ++s) {
    manifest.splits.push_back(SplitRecord{splits[s].service_id, splits[s].kind, splits[s].community_id,
                                          splits[s].device_id, placement.split_node[s], splits[s].samples.size(),
                                          sigmas[static_cast<std::size_t>(splits[s].community_id)]});
  }
  manifest.node_datasets = materialize(splits, placement);
  if (options.sparse) {
    manifest = sparsify_nodes(manifest, options.sparse->node_fraction, options.sparse->train_range, seed);
  }
  for (const auto& nd : manifest.node_datasets) topology.set_sample_count(nd.node_id, nd.train.size());
  return manifest;
}

}  // namespace mectrust
