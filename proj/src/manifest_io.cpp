#include "mectrust/manifest_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "mectrust/errors.hpp"

namespace fs = std::filesystem;

namespace mectrust {

namespace {

void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.append(buf, 8);
}

double get_f64(const char* p) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

std::string node_file(int node, const char* part) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "node_%04d_%s.bin", node, part);
  return buf;
}

const char* kind_name(ServiceKind k) { return k == ServiceKind::known ? "known" : "lesser_known"; }

ServiceKind kind_from(const std::string& s) {
  if (s == "known") return ServiceKind::known;
  if (s == "lesser_known") return ServiceKind::lesser_known;
  throw ValidationError("unknown service kind '" + s + "'");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

std::string encode_samples(std::span<const Sample> samples) {
  std::string out;
  for (const auto& s : samples) {
    put_f64(out, static_cast<double>(s.label));
    put_f64(out, static_cast<double>(s.service_id));
    for (double v : s.features) put_f64(out, v);
  }
  return out;
}

std::vector<Sample> decode_samples(const std::string& bytes, std::size_t feature_dim) {
  const std::size_t row_bytes = 8 * (feature_dim + 2);
  if (bytes.size() % row_bytes != 0) throw ValidationError("sample file size is not a whole number of rows");
  std::vector<Sample> out(bytes.size() / row_bytes);
  const char* p = bytes.data();
  for (auto& s : out) {
    const double label = get_f64(p);
    if (label != 1.0 && label != -1.0) throw ValidationError("sample label must be +1 or -1");
    s.label = static_cast<int>(label);
    s.service_id = static_cast<std::int64_t>(get_f64(p + 8));
    s.features.resize(feature_dim);
    for (std::size_t k = 0; k < feature_dim; ++k) s.features[k] = get_f64(p + 8 * (k + 2));
    p += row_bytes;
  }
  return out;
}

nlohmann::json manifest_to_json(const PartitionManifest& m) {
  nlohmann::json scaling = nlohmann::json::array();
  for (const auto& p : m.scaling_params) scaling.push_back({p.min, p.max});
  nlohmann::json encoding = nlohmann::json::array();
  for (const auto& e : m.encoding_map) encoding.push_back({{"column", e.column}, {"categories", e.categories}});
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& s : m.splits) {
    splits.push_back({{"service_id", s.service_id},
                      {"kind", kind_name(s.kind)},
                      {"community_id", s.community_id},
                      {"device_id", s.device_id},
                      {"node_id", s.node_id},
                      {"size", s.size},
                      {"noise_sigma", s.noise_sigma}});
  }
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& nd : m.node_datasets) {
    nodes.push_back({{"node_id", nd.node_id},
                     {"train_file", node_file(nd.node_id, "train")},
                     {"test_file", node_file(nd.node_id, "test")},
                     {"train_count", nd.train.size()},
                     {"test_count", nd.test.size()},
                     {"services", nd.services}});
  }
  return {{"dataset_name", m.dataset_name},
          {"feature_dim", m.feature_dim},
          {"feature_names", m.feature_names},
          {"row_layout", "float64 little-endian: label, service_id, features[feature_dim]"},
          {"seed", m.seed},
          {"scaling_params", scaling},
          {"encoding_map", encoding},
          {"splits", splits},
          {"nodes", nodes}};
}

void write_manifest(const PartitionManifest& m, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
  for (const auto& nd : m.node_datasets) {
    write_file(dir / node_file(nd.node_id, "train"), encode_samples(nd.train));
    write_file(dir / node_file(nd.node_id, "test"), encode_samples(nd.test));
  }
}

PartitionManifest read_manifest(const fs::path& dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest.json: " + std::string(e.what()));
  }
  PartitionManifest m;
  try {
    m.dataset_name = doc.at("dataset_name").get<std::string>();
    m.feature_dim = doc.at("feature_dim").get<std::size_t>();
    m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& p : doc.at("scaling_params")) m.scaling_params.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    for (const auto& e : doc.at("encoding_map")) {
      m.encoding_map.push_back({e.at("column").get<std::string>(), e.at("categories").get<std::vector<std::string>>()});
    }
    for (const auto& s : doc.at("splits")) {
      m.splits.push_back(SplitRecord{s.at("service_id").get<std::int64_t>(), kind_from(s.at("kind").get<std::string>()),
                                     s.at("community_id").get<int>(), s.at("device_id").get<int>(),
                                     s.at("node_id").get<int>(), s.at("size").get<std::size_t>(),
                                     s.at("noise_sigma").get<double>()});
    }
    int expected = 0;
    for (const auto& n : doc.at("nodes")) {
      NodeDataset nd;
      nd.node_id = n.at("node_id").get<int>();
      if (nd.node_id != expected++) throw ValidationError("manifest nodes must be listed by contiguous id");
      nd.services = n.at("services").get<std::vector<std::int64_t>>();
      nd.train = decode_samples(read_file(dir / n.at("train_file").get<std::string>()), m.feature_dim);
      nd.test = decode_samples(read_file(dir / n.at("test_file").get<std::string>()), m.feature_dim);
      if (nd.train.size() != n.at("train_count").get<std::size_t>() ||
          nd.test.size() != n.at("test_count").get<std::size_t>()) {
        throw ValidationError("sample file row count disagrees with manifest for node " + std::to_string(nd.node_id));
      }
      m.node_datasets.push_back(std::move(nd));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest.json: " + std::string(e.what()));
  }
  return m;
}

std::string manifest_digest(const PartitionManifest& m) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  const auto meta = manifest_to_json(m).dump();
  EVP_DigestUpdate(ctx, meta.data(), meta.size());
  for (const auto& nd : m.node_datasets) {
    const auto train = encode_samples(nd.train);
    const auto test = encode_samples(nd.test);
    EVP_DigestUpdate(ctx, train.data(), train.size());
    EVP_DigestUpdate(ctx, test.data(), test.size());
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

}  // namespace mectrust
