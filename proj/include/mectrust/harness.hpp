#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mectrust/admm.hpp"
#include "mectrust/manifest.hpp"
#include "mectrust/pipeline.hpp"
#include "mectrust/topology.hpp"
#include "mectrust/trust_model.hpp"

namespace mectrust {

enum class Method { proposed, global, local };

const char* method_name(Method m);
Method method_from_string(const std::string& s);

struct NodeAccuracy {
  int node_id = 0;
  double accuracy = 0.0;
  std::size_t test_count = 0;
};

struct Evaluation {
  std::vector<NodeAccuracy> per_node;
  std::vector<int> excluded_nodes;  // empty test sets
  double mean_accuracy = 0.0;
};

// Each node is scored with its own model. Nodes without test samples are
// excluded from the unweighted mean and listed.
Evaluation evaluate(std::span<const TrustModel> models, const PartitionManifest& manifest);
// Every node is scored with the same model.
Evaluation evaluate(const TrustModel& model, const PartitionManifest& manifest);

struct StageAccuracy {
  int stage = 0;
  double gamma = 0.0;
  int iterations = 0;
  bool converged = false;
  long long rounds_so_far = 0;
  double mean_accuracy = 0.0;
};

inline constexpr const char* kAssumptions =
    "wall time covers training only; MEC-cloud communication latency is treated as negligible";

struct RunReport {
  Method method = Method::proposed;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string dataset_name;
  std::size_t node_count = 0;
  std::vector<NodeAccuracy> per_node_accuracy;
  std::vector<int> excluded_nodes;
  double mean_accuracy = 0.0;
  long long rounds = 0;
  long long pooled_train_count = 0;
  double wall_time_seconds = 0.0;
  std::optional<std::string> trace_path;
  std::string manifest_digest;
  std::vector<StageAccuracy> stages;
  std::vector<std::vector<double>> models;
  std::string sweep_variable = "none";
  double sweep_value = 0.0;
  bool ok = true;
  std::string error_kind;  // "validation" or "convergence" when !ok
  std::string error_detail;
};

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

struct ExperimentOptions {
  std::optional<std::string> trace_path;  // JSON lines, proposed method only
  bool keep_models = true;
};

// Trains with the chosen method, evaluates and fills a report. Training
// failures come back as a report with ok = false.
RunReport run_experiment(Method method, const MecTopology& topology, const PartitionManifest& manifest,
                         const AdmmConfig& config, std::uint64_t seed, const ExperimentOptions& options = {});

enum class SweepVariable { node_count, data_fraction };

const char* variable_name(SweepVariable v);

struct SweepSpec {
  SweepVariable variable = SweepVariable::node_count;
  std::vector<double> values;
  int repeats = 1;

  void validate() const;
};

// Fixed ingredients of a sweep.
struct SweepSetup {
  std::vector<Method> methods{Method::proposed, Method::local, Method::global};
  AdmmConfig config;
  int base_nodes = 15;
  int neighbor_degree = kDefaultNeighborDegree;
  std::vector<DeviceTable> devices;
  PrepareOptions prepare;
};

// One run per (value, repeat, method). Node-count sweeps regenerate the
// topology and re-curate the data at every size; data-fraction sweeps
// subsample each node's training set. Repeat r uses seeds[r].
std::vector<RunReport> run_sweep(const SweepSpec& spec, const SweepSetup& setup, std::span<const std::uint64_t> seeds);

struct SweepRow {
  std::string method;
  std::string variable;
  double value = 0.0;
  int runs = 0;
  double mean_accuracy = 0.0;
  double stdev_accuracy = 0.0;
  double mean_rounds = 0.0;
  double stdev_rounds = 0.0;
  double mean_wall_time_seconds = 0.0;
};

// Mean and sample standard deviation per (method, value), sorted.
std::vector<SweepRow> aggregate(std::span<const RunReport> reports);
std::string render_sweep_csv(std::span<const SweepRow> rows);

enum class ReportFormat { csv, markdown };

// Columns: method, variable value, mean_accuracy, rounds, wall_time_seconds,
// seed. Rows sorted by (method, value, seed); markdown emits one table per
// swept variable.
std::string render_report(std::span<const RunReport> reports, ReportFormat format);

}  // namespace mectrust
