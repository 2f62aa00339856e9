#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mectrust/manifest.hpp"
#include "mectrust/topology.hpp"

namespace mectrust {

template <typename Row>
concept LabeledRow = requires(const Row& r) {
  { r.label } -> std::convertible_to<int>;
};

// Independent generator for (seed, stream) pairs, e.g. one per device or
// per split, so results do not depend on processing order.
std::mt19937_64 sub_generator(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain = 0);

struct SizeRange {
  std::size_t min = 0;
  std::size_t max = 0;
};

struct SplitOptions {
  SizeRange known{1000, 20000};
  SizeRange lesser{100, 500};
  double lesser_fraction = 0.15;

  void validate() const;
};

struct SplitDraw {
  std::size_t size = 0;
  ServiceKind kind = ServiceKind::known;
};

// Draws the next split size. Tests substitute a scripted sequence.
using SplitDrawFn = std::function<SplitDraw(std::mt19937_64&)>;

SplitDraw default_split_draw(const SplitOptions& options, std::mt19937_64& rng);

// Permutes rows and consumes them left to right into service splits. When a
// draw exceeds what is left, the remainder becomes one last known split if it
// reaches the known minimum and is discarded otherwise.
template <typename Row>
std::vector<BasicServiceSplit<Row>> split_into_services(std::vector<Row> rows, const SplitOptions& options,
                                                        std::uint64_t seed, int device_id,
                                                        std::int64_t first_service_id = 0,
                                                        const SplitDrawFn& draw = {}) {
  options.validate();
  std::vector<BasicServiceSplit<Row>> out;
  auto rng = sub_generator(seed, static_cast<std::uint64_t>(device_id), 1);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::size_t pos = 0;
  std::int64_t next_id = first_service_id;
  while (rows.size() - pos >= options.lesser.min) {
    SplitDraw d = draw ? draw(rng) : default_split_draw(options, rng);
    const std::size_t left = rows.size() - pos;
    if (d.size > left) {
      if (left < options.known.min) break;
      d = SplitDraw{left, ServiceKind::known};
    }
    BasicServiceSplit<Row> split;
    split.service_id = next_id++;
    split.kind = d.kind;
    split.device_id = device_id;
    split.samples.assign(std::make_move_iterator(rows.begin() + static_cast<std::ptrdiff_t>(pos)),
                         std::make_move_iterator(rows.begin() + static_cast<std::ptrdiff_t>(pos + d.size)));
    pos += d.size;
    out.push_back(std::move(split));
  }
  return out;
}

enum class CommunityMode {
  by_device,  // community = device_id mod communities
  uniform,    // drawn uniformly per split
};

template <typename Row>
void assign_communities(std::vector<BasicServiceSplit<Row>>& splits, int communities, std::uint64_t seed,
                        CommunityMode mode = CommunityMode::by_device) {
  if (communities < 1) throw std::invalid_argument("need at least one community");
  for (auto& s : splits) {
    if (mode == CommunityMode::by_device) {
      s.community_id = s.device_id % communities;
      continue;
    }
    auto rng = sub_generator(seed, static_cast<std::uint64_t>(s.service_id), 2);
    s.community_id = static_cast<int>(std::uniform_int_distribution<int>(0, communities - 1)(rng));
  }
}

// Default community noise levels, cycled over community ids.
std::vector<double> default_community_sigmas(int communities);

// Adds N(0, sigma_c^2) per feature component and clips to [0, 1]. sigma = 0
// leaves a split untouched. A non-empty noisy_columns mask limits the noise
// to the flagged columns.
void apply_community_noise(std::vector<ServiceSplit>& splits, std::span<const double> sigma_per_community,
                           std::uint64_t seed, const std::vector<bool>& noisy_columns = {});

struct AssignmentOptions {
  double tau = 0.3;
  double train_fraction = 0.8;
};

// Where every sample of every split ends up.
struct Placement {
  struct Ref {
    std::size_t split = 0;
    std::size_t row = 0;
  };
  std::vector<int> split_node;            // per split
  std::vector<std::vector<Ref>> train;    // per node
  std::vector<std::vector<Ref>> test;     // per node
  std::vector<Point> community_anchors;
};

std::size_t pick_node(const MecTopology& topology, const Point& anchor, double tau, std::mt19937_64& rng);

// Each community receives a random anchor in the unit square and each split
// goes to a node drawn with probability proportional to
// exp(-||node - anchor||^2 / tau^2). Known-service samples of a node are
// split train/test per label; lesser-known samples are test only.
template <LabeledRow Row>
Placement plan_assignment(std::span<const BasicServiceSplit<Row>> splits, const MecTopology& topology,
                          std::uint64_t seed, const AssignmentOptions& options = {}) {
  if (topology.node_count() == 0) throw std::invalid_argument("empty topology");
  if (!(options.tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(options.train_fraction >= 0.0 && options.train_fraction <= 1.0)) {
    throw std::invalid_argument("train fraction must lie in [0, 1]");
  }
  Placement p;
  int communities = 0;
  for (const auto& s : splits) communities = std::max(communities, s.community_id + 1);
  auto anchor_rng = sub_generator(seed, 0, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 0; c < communities; ++c) {
    const double x = unit(anchor_rng);
    const double y = unit(anchor_rng);
    p.community_anchors.push_back(Point{x, y});
  }

  const std::size_t m = topology.node_count();
  p.split_node.resize(splits.size());
  std::vector<std::vector<Placement::Ref>> known(m);
  p.test.assign(m, {});
  p.train.assign(m, {});
  for (std::size_t s = 0; s < splits.size(); ++s) {
    auto rng = sub_generator(seed, static_cast<std::uint64_t>(splits[s].service_id), 4);
    const auto node = pick_node(topology, p.community_anchors[static_cast<std::size_t>(splits[s].community_id)],
                                options.tau, rng);
    p.split_node[s] = static_cast<int>(node);
    auto& dest = splits[s].kind == ServiceKind::known ? known[node] : p.test[node];
    for (std::size_t r = 0; r < splits[s].samples.size(); ++r) dest.push_back({s, r});
  }

  for (std::size_t i = 0; i < m; ++i) {
    auto rng = sub_generator(seed, i, 5);
    std::vector<Placement::Ref> by_label[2];
    for (const auto& ref : known[i]) {
      const bool benign = static_cast<int>(splits[ref.split].samples[ref.row].label) > 0;
      by_label[benign ? 1 : 0].push_back(ref);
    }
    std::vector<Placement::Ref> held_out;
    for (auto& group : by_label) {
      std::shuffle(group.begin(), group.end(), rng);
      const auto n_train = static_cast<std::size_t>(
          std::floor(options.train_fraction * static_cast<double>(group.size()) + 0.5));
      p.train[i].insert(p.train[i].end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_train));
      held_out.insert(held_out.end(), group.begin() + static_cast<std::ptrdiff_t>(n_train), group.end());
    }
    std::shuffle(p.train[i].begin(), p.train[i].end(), rng);
    p.test[i].insert(p.test[i].end(), held_out.begin(), held_out.end());
  }
  return p;
}

// Copies samples into per-node datasets following a placement.
std::vector<NodeDataset> materialize(std::span<const ServiceSplit> splits, const Placement& placement);

// plan_assignment + materialize. Fills the split records and node datasets
// of the returned manifest and the topology's sample counts.
PartitionManifest assign_to_nodes(std::span<const ServiceSplit> splits, MecTopology& topology, std::uint64_t seed,
                                  const AssignmentOptions& options = {});

// Keeps round(fraction * n) training samples of every node, drawn without
// replacement. fraction = 1 returns the manifest unchanged.
PartitionManifest subsample_training(const PartitionManifest& manifest, double fraction, std::uint64_t seed);

// Makes the poorer part of the topology sparse: among nodes holding training
// data, the node_fraction share with the smallest training sets (ties to the
// lower id) each keep a uniformly drawn number of samples from
// [range.min, range.max], or all they have if fewer.
PartitionManifest sparsify_nodes(const PartitionManifest& manifest, double node_fraction, SizeRange range,
                                 std::uint64_t seed);

}  // namespace mectrust
