#include "mectrust/partition.hpp"

#include <array>
#include <numeric>

namespace mectrust {

std::mt19937_64 sub_generator(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(domain)};
  return std::mt19937_64(seq);
}

void SplitOptions::validate() const {
  if (known.min == 0 || known.min > known.max) throw std::invalid_argument("invalid known split range");
  if (lesser.min == 0 || lesser.min > lesser.max) throw std::invalid_argument("invalid lesser-known split range");
  if (!(lesser_fraction > 0.0 && lesser_fraction < 1.0)) throw std::invalid_argument("lesser_fraction must lie in (0, 1)");
}

SplitDraw default_split_draw(const SplitOptions& options, std::mt19937_64& rng) {
  const bool lesser = std::bernoulli_distribution(options.lesser_fraction)(rng);
  const auto& range = lesser ? options.lesser : options.known;
  const auto size = std::uniform_int_distribution<std::size_t>(range.min, range.max)(rng);
  return SplitDraw{size, lesser ? ServiceKind::lesser_known : ServiceKind::known};
}

std::vector<double> default_community_sigmas(int communities) {
  static constexpr std::array<double, 4> levels{0.0, 0.02, 0.05, 0.1};
  std::vector<double> out;
  for (int c = 0; c < communities; ++c) out.push_back(levels[static_cast<std::size_t>(c) % levels.size()]);
  return out;
}

void apply_community_noise(std::vector<ServiceSplit>& splits, std::span<const double> sigma_per_community,
                           std::uint64_t seed, const std::vector<bool>& noisy_columns) {
  for (double s : sigma_per_community) {
    if (!(s >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
  }
  for (auto& split : splits) {
    if (split.community_id < 0 || static_cast<std::size_t>(split.community_id) >= sigma_per_community.size()) {
      throw std::invalid_argument("split community has no noise level");
    }
    const double sigma = sigma_per_community[static_cast<std::size_t>(split.community_id)];
    if (sigma == 0.0) continue;
    auto rng = sub_generator(seed, static_cast<std::uint64_t>(split.service_id), 6);
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& sample : split.samples) {
      for (std::size_t k = 0; k < sample.features.size(); ++k) {
        if (!noisy_columns.empty() && !noisy_columns.at(k)) continue;
        auto& v = sample.features[k];
        v = std::clamp(v + noise(rng), 0.0, 1.0);
      }
    }
  }
}

std::size_t pick_node(const MecTopology& topology, const Point& anchor, double tau, std::mt19937_64& rng) {
  const auto& nodes = topology.nodes();
  std::vector<double> log_w(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double d = distance(nodes[i].position, anchor);
    log_w[i] = -(d * d) / (tau * tau);
  }
  // Normalize in log space so far-away anchors cannot underflow every weight.
  const double top = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> w(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) w[i] = std::exp(log_w[i] - top);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  return pick(rng);
}

std::vector<NodeDataset> materialize(std::span<const ServiceSplit> splits, const Placement& placement) {
  const std::size_t m = placement.train.size();
  std::vector<NodeDataset> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& nd = out[i];
    nd.node_id = static_cast<int>(i);
    for (const auto& ref : placement.train[i]) {
      nd.train.push_back(splits[ref.split].samples[ref.row]);
      nd.train.back().service_id = splits[ref.split].service_id;
    }
    for (const auto& ref : placement.test[i]) {
      nd.test.push_back(splits[ref.split].samples[ref.row]);
      nd.test.back().service_id = splits[ref.split].service_id;
    }
  }
  for (std::size_t s = 0; s < splits.size(); ++s) {
    out[static_cast<std::size_t>(placement.split_node[s])].services.push_back(splits[s].service_id);
  }
  return out;
}

PartitionManifest assign_to_nodes(std::span<const ServiceSplit> splits, MecTopology& topology, std::uint64_t seed,
                                  const AssignmentOptions& options) {
  if (splits.empty()) throw std::invalid_argument("no service splits to assign");
  const auto placement = plan_assignment(splits, topology, seed, options);
  PartitionManifest manifest;
  manifest.seed = seed;
  manifest.feature_dim = splits.front().samples.empty() ? 0 : splits.front().samples.front().features.size();
  for (std::size_t s = 0; s < splits.size(); ++s) {
    manifest.splits.push_back(SplitRecord{splits[s].service_id, splits[s].kind, splits[s].community_id,
                                          splits[s].device_id, placement.split_node[s], splits[s].samples.size(), 0.0});
  }
  manifest.node_datasets = materialize(splits, placement);
  for (const auto& nd : manifest.node_datasets) {
    for (const auto* set : {&nd.train, &nd.test}) {
      for (const auto& sample : *set) {
        if (sample.features.size() != manifest.feature_dim) throw std::invalid_argument("inconsistent feature dimension");
      }
    }
    topology.set_sample_count(nd.node_id, nd.train.size());
  }
  return manifest;
}

namespace {

std::vector<Sample> draw_without_replacement(const std::vector<Sample>& from, std::size_t keep, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(from.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  std::vector<Sample> out;
  out.reserve(keep);
  for (auto i : idx) out.push_back(from[i]);
  return out;
}

}  // namespace

PartitionManifest subsample_training(const PartitionManifest& manifest, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("data fraction must lie in (0, 1]");
  PartitionManifest out = manifest;
  if (fraction == 1.0) return out;
  for (auto& nd : out.node_datasets) {
    auto rng = sub_generator(seed, static_cast<std::uint64_t>(nd.node_id), 7);
    const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(nd.train.size()) + 0.5));
    nd.train = draw_without_replacement(nd.train, keep, rng);
  }
  return out;
}

PartitionManifest sparsify_nodes(const PartitionManifest& manifest, double node_fraction, SizeRange range,
                                 std::uint64_t seed) {
  if (!(node_fraction >= 0.0 && node_fraction <= 1.0)) throw std::invalid_argument("node fraction must lie in [0, 1]");
  if (range.min > range.max) throw std::invalid_argument("invalid sparse size range");
  PartitionManifest out = manifest;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < out.node_datasets.size(); ++i) {
    if (!out.node_datasets[i].train.empty()) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.node_datasets[a].train.size() < out.node_datasets[b].train.size();
  });
  const auto chosen = static_cast<std::size_t>(std::floor(node_fraction * static_cast<double>(order.size()) + 0.5));
  order.resize(chosen);
  std::sort(order.begin(), order.end());
  for (auto i : order) {
    auto& nd = out.node_datasets[i];
    auto node_rng = sub_generator(seed, i, 9);
    const auto target = std::uniform_int_distribution<std::size_t>(range.min, range.max)(node_rng);
    if (nd.train.size() > target) nd.train = draw_without_replacement(nd.train, target, node_rng);
  }
  return out;
}

}  // namespace mectrust
