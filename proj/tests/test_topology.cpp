#include <doctest.h>

#include <cmath>
#include <queue>
#include <set>

#include "mectrust/topology.hpp"

using namespace mectrust;

namespace {

// Plain BFS over the edge list, independent of MecTopology::is_connected.
bool bfs_connected(const MecTopology& t) {
  const auto m = t.node_count();
  if (m == 0) return true;
  std::vector<std::vector<int>> adj(m);
  for (const auto& e : t.edges()) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<bool> seen(m, false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int n : adj[v]) {
      if (!seen[n]) {
        seen[n] = true;
        ++count;
        q.push(n);
      }
    }
  }
  return count == m;
}

void check_invariants(const MecTopology& t) {
  std::set<std::pair<int, int>> pairs;
  for (const auto& e : t.edges()) {
    CHECK(e.a < e.b);
    CHECK(e.distance > 0.0);
    const double d = distance(t.nodes()[e.a].position, t.nodes()[e.b].position);
    CHECK(std::abs(e.distance - d) <= 1e-12);
    CHECK(pairs.insert({e.a, e.b}).second);
  }
  for (std::size_t i = 0; i < t.node_count(); ++i) CHECK(t.nodes()[i].id == static_cast<int>(i));
}

}  // namespace

TEST_CASE("from_edges computes distances") {
  std::vector<Point> pos{{0, 0}, {3, 4}, {3, 0}};
  std::vector<std::pair<int, int>> pairs{{1, 0}, {0, 2}};
  auto t = MecTopology::from_edges(pos, pairs);
  REQUIRE(t.edge_count() == 2);
  CHECK(t.edges()[0].a == 0);
  CHECK(t.edges()[0].b == 1);
  CHECK(t.edges()[0].distance == doctest::Approx(5.0));
  CHECK(t.edges()[1].distance == doctest::Approx(3.0));
  auto n = t.neighbors(0);
  REQUIRE(n.size() == 2);
  CHECK(n[0].id == 1);
  CHECK(n[1].id == 2);
  CHECK(t.is_connected());
}

TEST_CASE("from_edges rejects bad input") {
  std::vector<Point> pos{{0, 0}, {1, 0}};
  std::vector<std::pair<int, int>> loop{{0, 0}};
  CHECK_THROWS_AS(MecTopology::from_edges(pos, loop), std::invalid_argument);
  std::vector<std::pair<int, int>> dup{{0, 1}, {1, 0}};
  CHECK_THROWS_AS(MecTopology::from_edges(pos, dup), std::invalid_argument);
  std::vector<std::pair<int, int>> range{{0, 2}};
  CHECK_THROWS_AS(MecTopology::from_edges(pos, range), std::invalid_argument);
  std::vector<Point> same{{0.5, 0.5}, {0.5, 0.5}};
  std::vector<std::pair<int, int>> one{{0, 1}};
  CHECK_THROWS_AS(MecTopology::from_edges(same, one), std::invalid_argument);
}

TEST_CASE("disconnected pair is reported") {
  std::vector<Point> pos{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  std::vector<std::pair<int, int>> pairs{{0, 1}, {2, 3}};
  auto t = MecTopology::from_edges(pos, pairs);
  CHECK_FALSE(t.is_connected());
  CHECK_FALSE(bfs_connected(t));
}

TEST_CASE("generate_topology examples") {
  auto single = generate_topology(1, 1, 7);
  CHECK(single.node_count() == 1);
  CHECK(single.edge_count() == 0);
  CHECK(single.is_connected());

  auto two = generate_topology(2, 1, 7);
  CHECK(two.edge_count() == 1);

  CHECK_THROWS_AS(generate_topology(0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_topology(5, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_topology(5, 5, 1), std::invalid_argument);
}

TEST_CASE("generated topologies are connected and well formed") {
  for (int m : {3, 10, 25, 60}) {
    for (int k : {1, 2, 4}) {
      if (k >= m) continue;
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto t = generate_topology(m, k, seed);
        CHECK(t.node_count() == static_cast<std::size_t>(m));
        CHECK(bfs_connected(t));
        CHECK(t.is_connected());
        check_invariants(t);
        for (const auto& n : t.nodes()) {
          CHECK(n.position.x >= 0.0);
          CHECK(n.position.x <= 1.0);
          CHECK(n.position.y >= 0.0);
          CHECK(n.position.y <= 1.0);
          CHECK(t.neighbors(n.id).size() >= static_cast<std::size_t>(k));
        }
      }
    }
  }
}

TEST_CASE("each node links to its k nearest") {
  auto t = generate_topology(30, 3, 11);
  for (const auto& n : t.nodes()) {
    std::vector<std::pair<double, int>> by_dist;
    for (const auto& o : t.nodes()) {
      if (o.id != n.id) by_dist.push_back({distance(n.position, o.position), o.id});
    }
    std::sort(by_dist.begin(), by_dist.end());
    std::set<int> nb;
    for (const auto& x : t.neighbors(n.id)) nb.insert(x.id);
    for (int r = 0; r < 3; ++r) CHECK(nb.count(by_dist[r].second) == 1);
  }
}

TEST_CASE("topology generation is deterministic") {
  auto a = generate_topology(40, 4, 99);
  auto b = generate_topology(40, 4, 99);
  CHECK(a.to_json().dump() == b.to_json().dump());
  auto c = generate_topology(40, 4, 100);
  CHECK(a.to_json().dump() != c.to_json().dump());
}

TEST_CASE("json round trip") {
  auto t = generate_topology(12, 3, 5);
  auto back = MecTopology::from_json(t.to_json());
  CHECK(back.to_json().dump() == t.to_json().dump());
  auto doc = t.to_json();
  doc["edges"][0]["d"] = doc["edges"][0]["d"].get<double>() + 0.5;
  CHECK_THROWS(MecTopology::from_json(doc));
}

TEST_CASE("incident edges follow neighbor order") {
  auto t = generate_topology(20, 4, 3);
  for (const auto& n : t.nodes()) {
    const auto nb = t.neighbors(n.id);
    const auto& inc = t.incident_edges(n.id);
    REQUIRE(nb.size() == inc.size());
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const auto& e = t.edges()[inc[k]];
      CHECK((e.a == n.id ? e.b : e.a) == nb[k].id);
      CHECK(e.distance == nb[k].distance);
    }
  }
}
