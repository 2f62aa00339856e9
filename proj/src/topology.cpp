#include "mectrust/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>

namespace mectrust {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

using Pair = std::pair<int, int>;

Pair ordered(int a, int b) { return a < b ? Pair{a, b} : Pair{b, a}; }

// Prim's algorithm over the complete Euclidean graph; O(m^2) is fine for the
// topology sizes we simulate.
std::vector<Pair> euclidean_mst(const std::vector<Point>& pts) {
  const std::size_t m = pts.size();
  std::vector<Pair> tree;
  if (m < 2) return tree;
  std::vector<bool> in_tree(m, false);
  std::vector<double> best(m, std::numeric_limits<double>::infinity());
  std::vector<int> parent(m, -1);
  best[0] = 0.0;
  for (std::size_t step = 0; step < m; ++step) {
    int u = -1;
    for (std::size_t v = 0; v < m; ++v) {
      if (!in_tree[v] && (u < 0 || best[v] < best[static_cast<std::size_t>(u)])) u = static_cast<int>(v);
    }
    in_tree[static_cast<std::size_t>(u)] = true;
    if (parent[static_cast<std::size_t>(u)] >= 0) tree.push_back(ordered(parent[static_cast<std::size_t>(u)], u));
    for (std::size_t v = 0; v < m; ++v) {
      if (in_tree[v]) continue;
      const double d = distance(pts[static_cast<std::size_t>(u)], pts[v]);
      if (d < best[v]) {
        best[v] = d;
        parent[v] = u;
      }
    }
  }
  return tree;
}

}  // namespace

MecTopology MecTopology::from_edges(std::vector<Point> positions, std::span<const Pair> pairs) {
  MecTopology t;
  t.nodes_.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!std::isfinite(positions[i].x) || !std::isfinite(positions[i].y)) {
      throw std::invalid_argument("node position must be finite");
    }
    t.nodes_.push_back(MecNode{static_cast<int>(i), positions[i], 0});
  }
  std::set<Pair> seen;
  const int m = static_cast<int>(positions.size());
  for (auto [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= m || b >= m) throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self loop");
    const Pair key = ordered(a, b);
    if (!seen.insert(key).second) throw std::invalid_argument("duplicate edge");
    const double d = distance(positions[static_cast<std::size_t>(a)], positions[static_cast<std::size_t>(b)]);
    if (!(d > 0.0)) throw std::invalid_argument("edge endpoints coincide");
    t.edges_.push_back(MecEdge{key.first, key.second, d});
  }
  std::sort(t.edges_.begin(), t.edges_.end(),
            [](const MecEdge& l, const MecEdge& r) { return std::tie(l.a, l.b) < std::tie(r.a, r.b); });
  t.rebuild_adjacency();
  return t;
}

void MecTopology::rebuild_adjacency() {
  incident_.assign(nodes_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    incident_[static_cast<std::size_t>(edges_[e].a)].push_back(e);
    incident_[static_cast<std::size_t>(edges_[e].b)].push_back(e);
  }
  for (std::size_t i = 0; i < incident_.size(); ++i) {
    const int self = static_cast<int>(i);
    auto other = [&](std::size_t e) { return edges_[e].a == self ? edges_[e].b : edges_[e].a; };
    std::sort(incident_[i].begin(), incident_[i].end(),
              [&](std::size_t l, std::size_t r) { return other(l) < other(r); });
  }
}

void MecTopology::check_node(int i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= nodes_.size()) {
    throw std::invalid_argument("node id " + std::to_string(i) + " out of range");
  }
}

std::vector<Neighbor> MecTopology::neighbors(int i) const {
  check_node(i);
  std::vector<Neighbor> out;
  for (std::size_t e : incident_[static_cast<std::size_t>(i)]) {
    const auto& edge = edges_[e];
    out.push_back(Neighbor{edge.a == i ? edge.b : edge.a, edge.distance});
  }
  return out;
}

const std::vector<std::size_t>& MecTopology::incident_edges(int i) const {
  check_node(i);
  return incident_[static_cast<std::size_t>(i)];
}

bool MecTopology::is_connected() const {
  if (nodes_.empty()) return true;
  std::vector<bool> seen(nodes_.size(), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (const auto& nb : neighbors(u)) {
      if (!seen[static_cast<std::size_t>(nb.id)]) {
        seen[static_cast<std::size_t>(nb.id)] = true;
        ++reached;
        frontier.push(nb.id);
      }
    }
  }
  return reached == nodes_.size();
}

void MecTopology::set_sample_count(int i, std::size_t n) {
  check_node(i);
  nodes_[static_cast<std::size_t>(i)].sample_count = n;
}

nlohmann::json MecTopology::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) nodes.push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : edges_) edges.push_back({{"a", e.a}, {"b", e.b}, {"d", e.distance}});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

MecTopology MecTopology::from_json(const nlohmann::json& doc) {
  const auto& nodes = doc.at("nodes");
  std::vector<Point> positions(nodes.size());
  std::vector<bool> filled(nodes.size(), false);
  for (const auto& n : nodes) {
    const int id = n.at("id").get<int>();
    if (id < 0 || static_cast<std::size_t>(id) >= nodes.size() || filled[static_cast<std::size_t>(id)]) {
      throw std::invalid_argument("node ids must be distinct and contiguous from 0");
    }
    filled[static_cast<std::size_t>(id)] = true;
    positions[static_cast<std::size_t>(id)] = Point{n.at("x").get<double>(), n.at("y").get<double>()};
  }
  std::vector<Pair> pairs;
  for (const auto& e : doc.at("edges")) pairs.emplace_back(e.at("a").get<int>(), e.at("b").get<int>());
  auto t = from_edges(std::move(positions), pairs);
  // Stored distances must agree with the coordinates.
  std::size_t idx = 0;
  std::vector<MecEdge> sorted_in;
  for (const auto& e : doc.at("edges")) {
    auto [a, b] = ordered(e.at("a").get<int>(), e.at("b").get<int>());
    sorted_in.push_back(MecEdge{a, b, e.at("d").get<double>()});
  }
  std::sort(sorted_in.begin(), sorted_in.end(),
            [](const MecEdge& l, const MecEdge& r) { return std::tie(l.a, l.b) < std::tie(r.a, r.b); });
  for (const auto& e : t.edges()) {
    if (std::abs(sorted_in[idx++].distance - e.distance) > 1e-9) {
      throw std::invalid_argument("edge distance disagrees with node positions");
    }
  }
  return t;
}

MecTopology generate_topology(int m, int k, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("topology needs at least one node");
  if (k < 1) throw std::invalid_argument("neighbor degree k must be >= 1");
  if (m > 1 && k >= m) throw std::invalid_argument("neighbor degree k must be < node count");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> pts(static_cast<std::size_t>(m));
  for (auto& p : pts) {
    p.x = unit(rng);
    p.y = unit(rng);
  }
  if (m == 1) return MecTopology::from_edges(std::move(pts), {});

  std::set<Pair> pairs;
  std::vector<int> order(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::iota(order.begin(), order.end(), 0);
    const auto& pi = pts[static_cast<std::size_t>(i)];
    std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
      const double dl = distance(pi, pts[static_cast<std::size_t>(l)]);
      const double dr = distance(pi, pts[static_cast<std::size_t>(r)]);
      return dl < dr || (dl == dr && l < r);
    });
    int taken = 0;
    for (int j : order) {
      if (j == i) continue;
      pairs.insert(ordered(i, j));
      if (++taken == k) break;
    }
  }
  std::vector<Pair> edge_list(pairs.begin(), pairs.end());
  auto t = MecTopology::from_edges(pts, edge_list);
  if (t.is_connected()) return t;

  for (const auto& p : euclidean_mst(pts)) pairs.insert(p);
  edge_list.assign(pairs.begin(), pairs.end());
  return MecTopology::from_edges(std::move(pts), edge_list);
}

}  // namespace mectrust
