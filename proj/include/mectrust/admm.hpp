#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mectrust/manifest.hpp"
#include "mectrust/svm_solver.hpp"
#include "mectrust/topology.hpp"
#include "mectrust/trust_model.hpp"

namespace mectrust {

// Which sample counts enter the fusion weight of an undirected edge (a, b),
// a < b, at distance d.
enum class EdgeWeighting {
  symmetric,  // gamma * (n_a + n_b) / (2 d)
  literal,    // gamma * n_b / d, with b the knowledge-supplying endpoint
};

struct AdmmConfig {
  double rho = 1.0;
  double gamma_ini = 0.01;
  double gamma_inc = 10.0;
  double gamma_th = 10.0;
  int max_iters = 1000;
  // Absent thresholds default to 1e-3 * sqrt(directed edges * model dim).
  std::optional<double> eps_primal;
  std::optional<double> eps_dual;
  SvmParams svm;
  double w_solver_tol = 1e-9;
  int w_solver_max_iters = 20000;
  EdgeWeighting edge_weighting = EdgeWeighting::symmetric;
  // Threads used for the per-node and per-edge loops. Results do not depend
  // on this value.
  int workers = 1;

  void validate() const;
  double primal_threshold(std::size_t directed_edges, std::size_t dim) const;
  double dual_threshold(std::size_t directed_edges, std::size_t dim) const;
};

void to_json(nlohmann::json& j, const AdmmConfig& c);
// Rejects unknown keys; missing keys keep their defaults.
void from_json(const nlohmann::json& j, AdmmConfig& c);

// z and u for both directions of one undirected edge (a, b), a < b.
struct EdgeState {
  std::vector<double> z_ab, z_ba;
  std::vector<double> u_ab, u_ba;

  static EdgeState zeros(std::size_t dim);
  bool operator==(const EdgeState&) const = default;
};

// One MEC environment's solver state: its packed training set, the hinge
// weight resolved for its sample count, the warm-started local solver and
// the current model.
struct NodeState {
  ProxSvmSolver solver;
  std::vector<double> w;

  std::size_t train_count() const { return solver.data().rows(); }
};

struct IterationTrace {
  int stage = 0;
  int iteration = 0;  // 1-based within the stage
  double gamma = 0.0;
  double primal_residual_norm = 0.0;
  double dual_residual_norm = 0.0;
  long long rounds_so_far = 0;
};

nlohmann::json to_json_line(const IterationTrace& t);

// A directed view of one incident edge as node i sees it: z_ij and u_ij.
struct IncidentVars {
  std::span<const double> z;
  std::span<const double> u;
};

// argmin_w f_i(w) + sum_j rho/2 ||w - z_ij + u_ij||^2, warm-started from the
// node's previous solver state.
std::vector<double> w_update(NodeState& node, std::span<const IncidentVars> incident, const AdmmConfig& config);

struct ZPair {
  std::vector<double> z_ij;
  std::vector<double> z_ji;
};

// Closed-form minimizer of
//   lambda ||z_ij - z_ji|| + rho/2 (||w_i - z_ij + u_ij||^2 + ||w_j - z_ji + u_ji||^2).
ZPair z_update(std::span<const double> w_i, std::span<const double> w_j, std::span<const double> u_ij,
               std::span<const double> u_ji, double lambda_e, double rho);

// u_ij + (w_i - z_ij)
std::vector<double> u_update(std::span<const double> u_ij, std::span<const double> w_i, std::span<const double> z_ij);

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
};

// primal = sqrt(sum over directed edges ||w_i - z_ij||^2)
// dual   = rho * sqrt(sum over directed edges ||z_ij - z_ij_prev||^2)
Residuals residuals(const MecTopology& topology, std::span<const std::vector<double>> w,
                    std::span<const EdgeState> current, std::span<const EdgeState> previous, double rho);

double edge_weight(const MecEdge& edge, std::size_t n_a, std::size_t n_b, double gamma, EdgeWeighting mode);

// Everything ADMM threads between calls.
struct AdmmState {
  std::vector<NodeState> nodes;
  std::vector<EdgeState> edges;

  // Packs each node's training set and zero-initializes W, Z, U.
  static AdmmState initial(const MecTopology& topology, const PartitionManifest& manifest, const SvmParams& svm);

  std::vector<std::vector<double>> weights() const;
};

struct StageResult {
  std::vector<IterationTrace> trace;
  bool converged = false;
};

// One ADMM run at fixed gamma. rounds_before offsets rounds_so_far.
StageResult run_admm(const MecTopology& topology, const AdmmConfig& config, double gamma, AdmmState& state,
                     int stage = 0, long long rounds_before = 0);

struct StageSummary {
  int stage = 0;
  double gamma = 0.0;
  int iterations = 0;
  bool converged = false;
  long long rounds_so_far = 0;
};

struct BootstrapResult {
  std::vector<TrustModel> models;
  std::vector<IterationTrace> trace;
  std::vector<StageSummary> stages;

  long long rounds() const { return trace.empty() ? 0 : trace.back().rounds_so_far; }
};

using StageObserver = std::function<void(const StageSummary&, std::span<const std::vector<double>>)>;

// gamma continuation: gamma_ini, gamma_ini*gamma_inc, ... while gamma <= gamma_th,
// each stage warm-started from the previous W, Z, U.
BootstrapResult bootstrap(const MecTopology& topology, const PartitionManifest& manifest, const AdmmConfig& config,
                          const StageObserver& observer = {});

// Number of stages the gamma schedule produces.
std::vector<double> gamma_schedule(const AdmmConfig& config);

}  // namespace mectrust
