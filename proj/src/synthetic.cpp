#include "mectrust/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "mectrust/errors.hpp"
#include "mectrust/partition.hpp"

namespace fs = std::filesystem;

namespace mectrust {

namespace {

constexpr const char* kProtocols[] = {"tcp", "udp", "icmp"};

std::vector<double> unit_vector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(d);
  double n = 0.0;
  for (auto& x : v) {
    x = g(rng);
    n += x * x;
  }
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
  return v;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<DeviceTable> generate_devices(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.devices < 1 || spec.numeric_features < 1) throw std::invalid_argument("synthetic spec needs devices and features");
  const std::size_t d = spec.numeric_features;
  auto shared_rng = sub_generator(seed, 0, 20);
  const auto shared = unit_vector(d, shared_rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> offset(d), scale(d);
  for (std::size_t k = 0; k < d; ++k) {
    offset[k] = std::floor(unit(shared_rng) * 100.0);
    scale[k] = std::pow(10.0, 3.0 * unit(shared_rng));
  }

  const auto schema = synthetic_schema(spec);
  const auto layout = raw_layout(schema);
  std::vector<DeviceTable> out;
  for (int dev = 0; dev < spec.devices; ++dev) {
    auto rng = sub_generator(seed, static_cast<std::uint64_t>(dev), 21);
    std::vector<double> center(d);
    for (auto& c : center) c = 0.3 + 0.4 * unit(rng);
    auto own = unit_vector(d, rng);
    std::vector<double> signature(d);
    double n = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      signature[k] = shared[k] + spec.device_variation * own[k];
      n += signature[k] * signature[k];
    }
    for (auto& s : signature) s /= std::sqrt(n);

    std::normal_distribution<double> noise(0.0, spec.spread);
    std::bernoulli_distribution is_benign(spec.benign_fraction);
    std::bernoulli_distribution flip(spec.label_flip);
    std::discrete_distribution<int> benign_proto{0.6, 0.3, 0.1};
    std::discrete_distribution<int> harmful_proto{0.3, 0.5, 0.2};

    DeviceTable table;
    char name[32];
    std::snprintf(name, sizeof name, "device_%02d", dev);
    table.name = name;
    table.table.columns = layout;
    table.table.rows.reserve(spec.rows_per_device);
    for (std::size_t r = 0; r < spec.rows_per_device; ++r) {
      const bool benign = is_benign(rng);
      RawRow row;
      row.numeric.resize(d);
      for (std::size_t k = 0; k < d; ++k) {
        double u = center[k] + noise(rng) + (benign ? 0.0 : spec.separation * signature[k]);
        row.numeric[k] = offset[k] + scale[k] * u;
      }
      row.categorical.push_back(kProtocols[benign ? benign_proto(rng) : harmful_proto(rng)]);
      row.label = (benign != flip(rng)) ? kBenign : kHarmful;
      row.device = table.name;
      table.table.rows.push_back(std::move(row));
    }
    out.push_back(std::move(table));
  }
  return out;
}

Schema synthetic_schema(const SyntheticSpec& spec) {
  Schema s;
  s.dataset_name = "synthetic-iot";
  for (std::size_t k = 0; k < spec.numeric_features; ++k) s.columns.push_back({"f" + std::to_string(k), ColumnRole::numeric});
  s.columns.push_back({"proto", ColumnRole::categorical});
  s.columns.push_back({"label", ColumnRole::label});
  s.labels.benign = {"benign"};
  s.labels.harmful = {"mirai_*", "gafgyt_*"};
  return s;
}

void write_devices_csv(const std::vector<DeviceTable>& devices, const Schema& schema, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "schema.json");
    if (!out) throw IoError("cannot write schema to " + dir.string());
    out << schema.to_json().dump(2) << "\n";
  }
  fs::create_directories(dir / "devices");
  for (const auto& dev : devices) {
    std::ofstream out(dir / "devices" / (dev.name + ".csv"));
    if (!out) throw IoError("cannot write device file for " + dev.name);
    for (std::size_t c = 0; c < schema.columns.size(); ++c) out << (c ? "," : "") << schema.columns[c].name;
    out << "\n";
    std::size_t r = 0;
    for (const auto& row : dev.table.rows) {
      for (double v : row.numeric) out << fmt_double(v) << ",";
      out << row.categorical.at(0) << ",";
      out << (row.label == kBenign ? "benign" : (r % 2 ? "gafgyt_tcp" : "mirai_udp")) << "\n";
      ++r;
    }
  }
}

PrepareOptions surrogate_prepare_options() {
  PrepareOptions opt;
  opt.dataset_name = "synthetic-iot";
  opt.sparse = SparseNodes{0.5, SizeRange{10, 500}};
  return opt;
}

PartitionManifest separable_manifest(MecTopology& topology, std::size_t train_per_node, std::size_t test_per_node,
                                     std::size_t feature_dim, std::uint64_t seed, double margin) {
  auto rng = sub_generator(seed, 0, 30);
  auto normal = unit_vector(feature_dim, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double center_proj = 0.0;
  for (double v : normal) center_proj += 0.5 * v;

  auto draw = [&](std::mt19937_64& g) {
    for (;;) {
      Sample s;
      s.features.resize(feature_dim);
      double proj = 0.0;
      for (std::size_t k = 0; k < feature_dim; ++k) {
        s.features[k] = unit(g);
        proj += normal[k] * s.features[k];
      }
      const double signed_dist = proj - center_proj;
      if (std::abs(signed_dist) < margin) continue;
      s.label = signed_dist > 0 ? kBenign : kHarmful;
      s.service_id = 0;
      return s;
    }
  };

  PartitionManifest m;
  m.dataset_name = "separable";
  m.feature_dim = feature_dim;
  m.seed = seed;
  for (std::size_t k = 0; k < feature_dim; ++k) {
    m.feature_names.push_back("x" + std::to_string(k));
    m.scaling_params.push_back({0.0, 1.0});
  }
  for (std::size_t i = 0; i < topology.node_count(); ++i) {
    auto g = sub_generator(seed, i, 31);
    NodeDataset nd;
    nd.node_id = static_cast<int>(i);
    for (std::size_t s = 0; s < train_per_node; ++s) nd.train.push_back(draw(g));
    for (std::size_t s = 0; s < test_per_node; ++s) nd.test.push_back(draw(g));
    topology.set_sample_count(nd.node_id, nd.train.size());
    m.node_datasets.push_back(std::move(nd));
  }
  return m;
}

PartitionManifest replicated_manifest(MecTopology& topology, const NodeDataset& data, std::size_t feature_dim) {
  PartitionManifest m;
  m.dataset_name = "replicated";
  m.feature_dim = feature_dim;
  for (std::size_t i = 0; i < topology.node_count(); ++i) {
    NodeDataset nd = data;
    nd.node_id = static_cast<int>(i);
    topology.set_sample_count(nd.node_id, nd.train.size());
    m.node_datasets.push_back(std::move(nd));
  }
  return m;
}

}  // namespace mectrust
