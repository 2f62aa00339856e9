#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mectrust {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

// One MEC environment. sample_count is the training-set size n_i used by the
// edge weights; it stays 0 until data is attached.
struct MecNode {
  int id = 0;
  Point position;
  std::size_t sample_count = 0;
};

struct MecEdge {
  int a = 0;  // always a < b
  int b = 0;
  double distance = 0.0;
};

struct Neighbor {
  int id;
  double distance;

  bool operator==(const Neighbor&) const = default;
};

// Undirected partial mesh over MEC environments. Edges are kept sorted by
// (a, b) with a < b; every deterministic reduction downstream walks them in
// this order.
class MecTopology {
 public:
  MecTopology() = default;

  // Builds a topology from explicit positions and node pairs. Distances are
  // recomputed from the positions. Throws std::invalid_argument on self
  // loops, duplicate pairs, out-of-range ids or coincident endpoints.
  static MecTopology from_edges(std::vector<Point> positions,
                                std::span<const std::pair<int, int>> pairs);

  const std::vector<MecNode>& nodes() const { return nodes_; }
  const std::vector<MecEdge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Neighbors of node i sorted ascending by id.
  std::vector<Neighbor> neighbors(int i) const;

  // Incident edge indices of node i, ordered like neighbors(i).
  const std::vector<std::size_t>& incident_edges(int i) const;

  bool is_connected() const;

  void set_sample_count(int i, std::size_t n);

  nlohmann::json to_json() const;
  static MecTopology from_json(const nlohmann::json& doc);

 private:
  void check_node(int i) const;
  void rebuild_adjacency();

  std::vector<MecNode> nodes_;
  std::vector<MecEdge> edges_;
  std::vector<std::vector<std::size_t>> incident_;
};

// m nodes uniform in the unit square, each joined to its k nearest
// neighbours (ties to the lower id), symmetrized, then unioned with a
// Euclidean minimum spanning tree if the k-NN graph is disconnected.
MecTopology generate_topology(int m, int k, std::uint64_t seed);

inline constexpr int kDefaultNeighborDegree = 4;

}  // namespace mectrust
