#include "mectrust/harness.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "mectrust/baselines.hpp"
#include "mectrust/errors.hpp"
#include "mectrust/manifest_io.hpp"

namespace mectrust {

const char* method_name(Method m) {
  switch (m) {
    case Method::proposed:
      return "proposed";
    case Method::global:
      return "global";
    case Method::local:
      return "local";
  }
  return "proposed";
}

Method method_from_string(const std::string& s) {
  if (s == "proposed") return Method::proposed;
  if (s == "global") return Method::global;
  if (s == "local") return Method::local;
  throw std::invalid_argument("unknown method '" + s + "'");
}

namespace {

double node_accuracy(const TrustModel& model, const std::vector<Sample>& test) {
  std::size_t correct = 0;
  for (const auto& s : test) correct += classify(model, s.features) == s.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

template <typename ModelFor>
Evaluation evaluate_with(const PartitionManifest& manifest, ModelFor&& model_for) {
  Evaluation ev;
  double sum = 0.0;
  for (std::size_t i = 0; i < manifest.node_datasets.size(); ++i) {
    const auto& nd = manifest.node_datasets[i];
    if (nd.test.empty()) {
      ev.excluded_nodes.push_back(nd.node_id);
      continue;
    }
    const double acc = node_accuracy(model_for(i), nd.test);
    ev.per_node.push_back(NodeAccuracy{nd.node_id, acc, nd.test.size()});
    sum += acc;
  }
  if (ev.per_node.empty()) throw std::invalid_argument("every test set is empty");
  ev.mean_accuracy = sum / static_cast<double>(ev.per_node.size());
  return ev;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Evaluation evaluate(std::span<const TrustModel> models, const PartitionManifest& manifest) {
  if (models.size() != manifest.node_datasets.size()) throw std::invalid_argument("one model per node expected");
  return evaluate_with(manifest, [&](std::size_t i) -> const TrustModel& { return models[i]; });
}

Evaluation evaluate(const TrustModel& model, const PartitionManifest& manifest) {
  return evaluate_with(manifest, [&](std::size_t) -> const TrustModel& { return model; });
}

RunReport run_experiment(Method method, const MecTopology& topology, const PartitionManifest& manifest,
                         const AdmmConfig& config, std::uint64_t seed, const ExperimentOptions& options) {
  RunReport report;
  report.method = method;
  report.config = config;
  report.seed = seed;
  report.dataset_name = manifest.dataset_name;
  report.node_count = topology.node_count();
  report.pooled_train_count = static_cast<long long>(manifest.pooled_train_count());
  report.manifest_digest = manifest_digest(manifest);
  report.trace_path = method == Method::proposed ? options.trace_path : std::nullopt;

  try {
    config.validate();
    std::vector<TrustModel> models;
    double excluded_seconds = 0.0;
    const auto start = Clock::now();
    switch (method) {
      case Method::proposed: {
        auto observer = [&](const StageSummary& s, std::span<const std::vector<double>> w) {
          const auto t0 = Clock::now();
          std::vector<TrustModel> stage_models;
          for (const auto& v : w) stage_models.emplace_back(v);
          const auto ev = evaluate(stage_models, manifest);
          report.stages.push_back(
              StageAccuracy{s.stage, s.gamma, s.iterations, s.converged, s.rounds_so_far, ev.mean_accuracy});
          excluded_seconds += seconds_since(t0);
        };
        auto result = bootstrap(topology, manifest, config, observer);
        report.wall_time_seconds = seconds_since(start) - excluded_seconds;
        report.rounds = result.rounds();
        models = std::move(result.models);
        if (options.trace_path) {
          std::ofstream out(*options.trace_path);
          if (!out) throw IoError("cannot write trace to " + *options.trace_path);
          for (const auto& t : result.trace) out << to_json_line(t).dump() << "\n";
        }
        break;
      }
      case Method::global: {
        auto g = train_global(manifest, config.svm, config.w_solver_tol, config.w_solver_max_iters);
        report.wall_time_seconds = seconds_since(start);
        report.rounds = g.rounds;
        models.assign(manifest.node_datasets.size(), g.model);
        break;
      }
      case Method::local: {
        models = train_local(manifest, config.svm, config.w_solver_tol, config.w_solver_max_iters, config.workers);
        report.wall_time_seconds = seconds_since(start);
        report.rounds = 0;
        break;
      }
    }
    const auto ev = evaluate(models, manifest);
    report.per_node_accuracy = ev.per_node;
    report.excluded_nodes = ev.excluded_nodes;
    report.mean_accuracy = ev.mean_accuracy;
    if (options.keep_models) {
      if (method == Method::global && !models.empty()) {
        report.models.push_back(models.front().w);
      } else {
        for (const auto& m : models) report.models.push_back(m.w);
      }
    }
  } catch (const ConvergenceError& e) {
    report.ok = false;
    report.error_kind = "convergence";
    report.error_detail = e.what();
  } catch (const std::invalid_argument& e) {
    report.ok = false;
    report.error_kind = "validation";
    report.error_detail = e.what();
  } catch (const ValidationError& e) {
    report.ok = false;
    report.error_kind = "validation";
    report.error_detail = e.what();
  }
  return report;
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : r.per_node_accuracy) {
    nodes.push_back({{"node_id", n.node_id}, {"accuracy", n.accuracy}, {"test_count", n.test_count}});
  }
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"stage", s.stage},
                      {"gamma", s.gamma},
                      {"iterations", s.iterations},
                      {"converged", s.converged},
                      {"rounds_so_far", s.rounds_so_far},
                      {"mean_accuracy", s.mean_accuracy}});
  }
  nlohmann::json j{{"method", method_name(r.method)},
                   {"config", r.config},
                   {"seed", r.seed},
                   {"dataset_name", r.dataset_name},
                   {"node_count", r.node_count},
                   {"per_node_accuracy", nodes},
                   {"excluded_nodes", r.excluded_nodes},
                   {"mean_accuracy", r.mean_accuracy},
                   {"rounds", r.rounds},
                   {"pooled_train_count", r.pooled_train_count},
                   {"wall_time_seconds", r.wall_time_seconds},
                   {"trace_path", r.trace_path ? nlohmann::json(*r.trace_path) : nlohmann::json(nullptr)},
                   {"manifest_digest", r.manifest_digest},
                   {"stages", stages},
                   {"models", r.models},
                   {"sweep", {{"variable", r.sweep_variable}, {"value", r.sweep_value}}},
                   {"assumptions", kAssumptions},
                   {"external_baselines", {{"tt_svd", nullptr}, {"wahab_et_al", nullptr}}},
                   {"status", r.ok ? "ok" : "failed"}};
  if (!r.ok) j["error"] = {{"kind", r.error_kind}, {"detail", r.error_detail}};
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.method = method_from_string(j.at("method").get<std::string>());
  r.config = j.at("config");
  r.seed = j.at("seed").get<std::uint64_t>();
  r.dataset_name = j.value("dataset_name", std::string());
  r.node_count = j.value("node_count", std::size_t{0});
  for (const auto& n : j.at("per_node_accuracy")) {
    r.per_node_accuracy.push_back(
        {n.at("node_id").get<int>(), n.at("accuracy").get<double>(), n.at("test_count").get<std::size_t>()});
  }
  r.excluded_nodes = j.value("excluded_nodes", std::vector<int>{});
  r.mean_accuracy = j.at("mean_accuracy").get<double>();
  r.rounds = j.at("rounds").get<long long>();
  r.pooled_train_count = j.value("pooled_train_count", 0LL);
  r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  if (j.contains("trace_path") && !j.at("trace_path").is_null()) r.trace_path = j.at("trace_path").get<std::string>();
  r.manifest_digest = j.value("manifest_digest", std::string());
  for (const auto& s : j.value("stages", nlohmann::json::array())) {
    r.stages.push_back({s.at("stage").get<int>(), s.at("gamma").get<double>(), s.at("iterations").get<int>(),
                        s.at("converged").get<bool>(), s.at("rounds_so_far").get<long long>(),
                        s.at("mean_accuracy").get<double>()});
  }
  r.models = j.value("models", std::vector<std::vector<double>>{});
  if (j.contains("sweep")) {
    r.sweep_variable = j.at("sweep").at("variable").get<std::string>();
    r.sweep_value = j.at("sweep").at("value").get<double>();
  }
  r.ok = j.value("status", std::string("ok")) == "ok";
  if (!r.ok && j.contains("error")) {
    r.error_kind = j.at("error").value("kind", std::string());
    r.error_detail = j.at("error").value("detail", std::string());
  }
  return r;
}

}  // namespace mectrust
