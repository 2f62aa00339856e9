#include <doctest.h>

#include <cmath>

#include "mectrust/baselines.hpp"
#include "mectrust/harness.hpp"
#include "mectrust/synthetic.hpp"

using namespace mectrust;

namespace {

PartitionManifest manual_manifest(std::vector<std::vector<Sample>> tests) {
  PartitionManifest m;
  m.feature_dim = 1;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    NodeDataset nd;
    nd.node_id = static_cast<int>(i);
    nd.test = std::move(tests[i]);
    m.node_datasets.push_back(std::move(nd));
  }
  return m;
}

RunReport fake(Method m, double value, std::uint64_t seed, double acc) {
  RunReport r;
  r.method = m;
  r.sweep_variable = "node_count";
  r.sweep_value = value;
  r.seed = seed;
  r.mean_accuracy = acc;
  r.rounds = static_cast<long long>(value) * 10;
  r.wall_time_seconds = 0.5;
  return r;
}

}  // namespace

TEST_CASE("evaluate counts correct predictions") {
  // model predicts sign(x): x = 1, 1, -1 -> +1, +1, -1
  TrustModel m({1.0, 0.0});
  auto man = manual_manifest({{{{1.0}, 1, 0}, {{1.0}, -1, 0}, {{-1.0}, -1, 0}}});
  auto ev = evaluate(m, man);
  REQUIRE(ev.per_node.size() == 1);
  CHECK(ev.per_node[0].accuracy == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("zero model on harmful labels scores 1") {
  auto man = manual_manifest({{{{0.3}, -1, 0}, {{0.9}, -1, 0}}});
  CHECK(evaluate(TrustModel::zeros(1), man).mean_accuracy == 1.0);
}

TEST_CASE("unweighted mean and exclusions") {
  std::vector<Sample> a(10, Sample{{1.0}, 1, 0});
  for (int k = 0; k < 2; ++k) a[static_cast<std::size_t>(k)].label = -1;
  std::vector<Sample> b(10, Sample{{1.0}, 1, 0});
  b[0].label = -1;
  auto man = manual_manifest({a, {}, b});
  TrustModel m({1.0, 0.0});
  auto ev = evaluate(m, man);
  CHECK(ev.per_node.size() == 2);
  CHECK(ev.excluded_nodes == std::vector<int>{1});
  CHECK(ev.mean_accuracy == doctest::Approx(0.85));
  auto empty = manual_manifest({{}, {}});
  CHECK_THROWS_AS(evaluate(m, empty), std::invalid_argument);
}

TEST_CASE("round accounting per method") {
  auto topo = generate_topology(6, 2, 4);
  auto man = separable_manifest(topo, 40, 20, 3, 4);
  AdmmConfig cfg;
  auto local = run_experiment(Method::local, topo, man, cfg, 4);
  CHECK(local.ok);
  CHECK(local.rounds == 0);
  auto global = run_experiment(Method::global, topo, man, cfg, 4);
  CHECK(global.rounds == static_cast<long long>(man.pooled_train_count()));
  CHECK(global.models.size() == 1);
  auto proposed = run_experiment(Method::proposed, topo, man, cfg, 4);
  CHECK(proposed.ok);
  CHECK(proposed.stages.size() == 4);
  CHECK(proposed.rounds == proposed.stages.back().rounds_so_far);
  CHECK(proposed.models.size() == 6);
  for (const auto* r : {&local, &global, &proposed}) {
    double sum = 0.0;
    for (const auto& n : r->per_node_accuracy) {
      CHECK(n.accuracy >= 0.0);
      CHECK(n.accuracy <= 1.0);
      sum += n.accuracy;
    }
    CHECK(std::abs(r->mean_accuracy - sum / static_cast<double>(r->per_node_accuracy.size())) <= 1e-12);
    CHECK(r->manifest_digest.size() == 64);
  }
}

TEST_CASE("reports are deterministic apart from wall time") {
  auto topo = generate_topology(5, 2, 6);
  auto man = separable_manifest(topo, 30, 10, 3, 6);
  AdmmConfig cfg;
  auto a = to_json(run_experiment(Method::proposed, topo, man, cfg, 6));
  auto b = to_json(run_experiment(Method::proposed, topo, man, cfg, 6));
  a.erase("wall_time_seconds");
  b.erase("wall_time_seconds");
  CHECK(a.dump() == b.dump());
  auto back = to_json(report_from_json(a.contains("status") ? to_json(run_experiment(Method::proposed, topo, man, cfg, 6))
                                                            : a));
  back.erase("wall_time_seconds");
  CHECK(back.dump() == a.dump());
  CHECK(a.at("assumptions").get<std::string>().find("negligible") != std::string::npos);
}

TEST_CASE("convergence failures come back as failed reports") {
  auto topo = generate_topology(4, 2, 2);
  auto man = separable_manifest(topo, 50, 10, 3, 2, 0.0);
  AdmmConfig cfg;
  cfg.svm = SvmParams{100.0, CostScaling::sum};
  cfg.w_solver_tol = 1e-15;
  cfg.w_solver_max_iters = 1;
  auto r = run_experiment(Method::proposed, topo, man, cfg, 2);
  CHECK_FALSE(r.ok);
  CHECK(r.error_kind == "convergence");
  CHECK(r.error_detail.find("node") != std::string::npos);
}

TEST_CASE("render_report ordering and determinism") {
  std::vector<RunReport> rs{fake(Method::proposed, 20, 1, 0.8), fake(Method::local, 10, 1, 0.7),
                            fake(Method::proposed, 10, 1, 0.9), fake(Method::local, 20, 1, 0.6)};
  auto csv = render_report(rs, ReportFormat::csv);
  CHECK(csv ==
        "method,variable,value,mean_accuracy,rounds,wall_time_seconds,seed\n"
        "local,node_count,10,0.700000,100,0.500,1\n"
        "local,node_count,20,0.600000,200,0.500,1\n"
        "proposed,node_count,10,0.900000,100,0.500,1\n"
        "proposed,node_count,20,0.800000,200,0.500,1\n");
  CHECK(render_report(rs, ReportFormat::csv) == csv);
  std::vector<RunReport> one{fake(Method::global, 10, 3, 0.5)};
  auto single = render_report(one, ReportFormat::csv);
  CHECK(std::count(single.begin(), single.end(), '\n') == 2);
  auto md = render_report(rs, ReportFormat::markdown);
  CHECK(md.find("### node_count") != std::string::npos);
  CHECK(md.find("| proposed | 20 | 0.8000 | 200 | 0.500 | 1 |") != std::string::npos);
  CHECK_THROWS_AS(render_report({}, ReportFormat::csv), std::invalid_argument);
}

TEST_CASE("aggregate mean and stdev") {
  std::vector<RunReport> rs{fake(Method::proposed, 10, 1, 0.8), fake(Method::proposed, 10, 2, 0.9),
                            fake(Method::proposed, 10, 3, 1.0)};
  auto rows = aggregate(rs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].runs == 3);
  CHECK(rows[0].mean_accuracy == doctest::Approx(0.9));
  CHECK(rows[0].stdev_accuracy == doctest::Approx(0.1));
  CHECK(render_sweep_csv(rows).find("proposed,node_count,10,3,0.900000,0.100000") != std::string::npos);
}

TEST_CASE("sweep spec validation") {
  SweepSpec s;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.values = {10, 10};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.values = {10, 20};
  s.repeats = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.repeats = 3;
  CHECK_NOTHROW(s.validate());
  SweepSpec f{SweepVariable::data_fraction, {0.5, 1.5}, 1};
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

TEST_CASE("sweep run counts and identity fraction") {
  SyntheticSpec spec;
  spec.devices = 2;
  spec.rows_per_device = 4000;
  spec.numeric_features = 4;
  SweepSetup setup;
  setup.devices = generate_devices(spec, 1);
  setup.methods = {Method::local, Method::global};
  SweepSpec nodes{SweepVariable::node_count, {3, 5}, 3};
  auto runs = run_sweep(nodes, setup, {});
  CHECK(runs.size() == 2 * 3 * 2);
  CHECK(aggregate(runs).size() == 4);

  setup.base_nodes = 4;
  SweepSpec frac{SweepVariable::data_fraction, {1.0}, 1};
  std::vector<std::uint64_t> seeds{7};
  auto swept = run_sweep(frac, setup, seeds);
  auto topo = generate_topology(4, std::min(setup.neighbor_degree, 3), 7);
  auto man = prepare_partition(setup.devices, topo, setup.prepare, 7);
  auto plain = run_experiment(Method::local, topo, man, setup.config, 7);
  CHECK(swept[0].manifest_digest == plain.manifest_digest);
  CHECK(swept[0].mean_accuracy == plain.mean_accuracy);
}
