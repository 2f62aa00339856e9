#include "mectrust/admm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "mectrust/errors.hpp"

namespace mectrust {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

double sq_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

template <typename Fn>
void for_each_index(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  tbb::task_arena arena(workers);
  arena.execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 1), [&](const tbb::blocked_range<std::size_t>& r) {
      for (std::size_t i = r.begin(); i != r.end(); ++i) fn(i);
    });
  });
}

const char* to_string(EdgeWeighting m) { return m == EdgeWeighting::symmetric ? "symmetric" : "literal"; }
const char* to_string(CostScaling s) { return s == CostScaling::mean ? "mean" : "sum"; }

}  // namespace

void AdmmConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(rho, "rho");
  positive(gamma_ini, "gamma_ini");
  positive(gamma_th, "gamma_th");
  if (!(gamma_inc > 1.0)) throw std::invalid_argument("gamma_inc must be > 1");
  if (gamma_ini > gamma_th) throw std::invalid_argument("gamma_ini must not exceed gamma_th");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (eps_primal) positive(*eps_primal, "eps_primal");
  if (eps_dual) positive(*eps_dual, "eps_dual");
  svm.validate();
  positive(w_solver_tol, "w_solver_tol");
  if (w_solver_max_iters < 1) throw std::invalid_argument("w_solver_max_iters must be positive");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

double AdmmConfig::primal_threshold(std::size_t directed_edges, std::size_t dim) const {
  return eps_primal ? *eps_primal : 1e-3 * std::sqrt(static_cast<double>(directed_edges * dim));
}

double AdmmConfig::dual_threshold(std::size_t directed_edges, std::size_t dim) const {
  return eps_dual ? *eps_dual : 1e-3 * std::sqrt(static_cast<double>(directed_edges * dim));
}

void to_json(nlohmann::json& j, const AdmmConfig& c) {
  j = nlohmann::json{{"rho", c.rho},
                     {"gamma_ini", c.gamma_ini},
                     {"gamma_inc", c.gamma_inc},
                     {"gamma_th", c.gamma_th},
                     {"max_iters", c.max_iters},
                     {"eps_primal", c.eps_primal ? nlohmann::json(*c.eps_primal) : nlohmann::json(nullptr)},
                     {"eps_dual", c.eps_dual ? nlohmann::json(*c.eps_dual) : nlohmann::json(nullptr)},
                     {"svm", {{"C", c.svm.C}, {"scaling", to_string(c.svm.scaling)}}},
                     {"w_solver_tol", c.w_solver_tol},
                     {"w_solver_max_iters", c.w_solver_max_iters},
                     {"edge_weighting", to_string(c.edge_weighting)},
                     {"workers", c.workers}};
}

void from_json(const nlohmann::json& j, AdmmConfig& c) {
  static const std::set<std::string> known{"rho",          "gamma_ini",          "gamma_inc",      "gamma_th",
                                           "max_iters",    "eps_primal",         "eps_dual",       "svm",
                                           "w_solver_tol", "w_solver_max_iters", "edge_weighting", "workers"};
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValidationError("unknown config key '" + key + "'");
  }
  auto opt = [&](const char* key, std::optional<double>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
      out.reset();
    } else {
      out = j.at(key).get<double>();
    }
  };
  if (j.contains("rho")) c.rho = j.at("rho").get<double>();
  if (j.contains("gamma_ini")) c.gamma_ini = j.at("gamma_ini").get<double>();
  if (j.contains("gamma_inc")) c.gamma_inc = j.at("gamma_inc").get<double>();
  if (j.contains("gamma_th")) c.gamma_th = j.at("gamma_th").get<double>();
  if (j.contains("max_iters")) c.max_iters = j.at("max_iters").get<int>();
  opt("eps_primal", c.eps_primal);
  opt("eps_dual", c.eps_dual);
  if (j.contains("svm")) {
    const auto& s = j.at("svm");
    for (const auto& [key, _] : s.items()) {
      if (key != "C" && key != "scaling") throw ValidationError("unknown svm key '" + key + "'");
    }
    if (s.contains("C")) c.svm.C = s.at("C").get<double>();
    if (s.contains("scaling")) {
      const auto v = s.at("scaling").get<std::string>();
      if (v == "mean") {
        c.svm.scaling = CostScaling::mean;
      } else if (v == "sum") {
        c.svm.scaling = CostScaling::sum;
      } else {
        throw ValidationError("svm.scaling must be 'mean' or 'sum'");
      }
    }
  }
  if (j.contains("w_solver_tol")) c.w_solver_tol = j.at("w_solver_tol").get<double>();
  if (j.contains("w_solver_max_iters")) c.w_solver_max_iters = j.at("w_solver_max_iters").get<int>();
  if (j.contains("edge_weighting")) {
    const auto v = j.at("edge_weighting").get<std::string>();
    if (v == "symmetric") {
      c.edge_weighting = EdgeWeighting::symmetric;
    } else if (v == "literal") {
      c.edge_weighting = EdgeWeighting::literal;
    } else {
      throw ValidationError("edge_weighting must be 'symmetric' or 'literal'");
    }
  }
  if (j.contains("workers")) c.workers = j.at("workers").get<int>();
}

EdgeState EdgeState::zeros(std::size_t dim) {
  std::vector<double> z(dim, 0.0);
  return EdgeState{z, z, z, z};
}

nlohmann::json to_json_line(const IterationTrace& t) {
  return {{"stage", t.stage},
          {"iteration", t.iteration},
          {"gamma", t.gamma},
          {"primal_residual_norm", t.primal_residual_norm},
          {"dual_residual_norm", t.dual_residual_norm},
          {"rounds_so_far", t.rounds_so_far}};
}

std::vector<double> w_update(NodeState& node, std::span<const IncidentVars> incident, const AdmmConfig& config) {
  const double rho = config.rho;
  if (rho < 0.0) throw std::invalid_argument("rho must be non-negative");
  const std::size_t dim = node.w.size();
  // sum_j rho/2 ||w - v_j||^2 + 0.5||w||^2 = alpha/2 ||w - c||^2 + offset
  const double alpha = 1.0 + rho * static_cast<double>(incident.size());
  std::vector<double> center(dim, 0.0);
  double anchor_sq = 0.0;
  for (const auto& inc : incident) {
    if (inc.z.size() != dim || inc.u.size() != dim) throw std::invalid_argument("edge state dimension mismatch");
    for (std::size_t k = 0; k < dim; ++k) {
      const double v = inc.z[k] - inc.u[k];
      center[k] += rho * v;
      anchor_sq += v * v;
    }
  }
  for (auto& c : center) c /= alpha;
  const double offset = std::max(0.0, 0.5 * rho * anchor_sq - 0.5 * alpha * sq_norm(center));
  std::vector<double> w(dim, 0.0);
  node.solver.solve(alpha, center, offset, config.w_solver_tol, config.w_solver_max_iters, w);
  return w;
}

ZPair z_update(std::span<const double> w_i, std::span<const double> w_j, std::span<const double> u_ij,
               std::span<const double> u_ji, double lambda_e, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  if (lambda_e < 0.0) throw std::invalid_argument("edge weight must be non-negative");
  const std::size_t dim = w_i.size();
  if (w_j.size() != dim || u_ij.size() != dim || u_ji.size() != dim) {
    throw std::invalid_argument("z-update dimension mismatch");
  }
  std::vector<double> a(dim), b(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    a[k] = w_i[k] + u_ij[k];
    b[k] = w_j[k] + u_ji[k];
  }
  const double gap = std::sqrt(sq_dist(a, b));
  if (gap == 0.0) return ZPair{a, b};
  const double theta = std::max(1.0 - lambda_e / (rho * gap), 0.5);
  ZPair out{std::vector<double>(dim), std::vector<double>(dim)};
  for (std::size_t k = 0; k < dim; ++k) {
    out.z_ij[k] = theta * a[k] + (1.0 - theta) * b[k];
    out.z_ji[k] = (1.0 - theta) * a[k] + theta * b[k];
  }
  return out;
}

std::vector<double> u_update(std::span<const double> u_ij, std::span<const double> w_i,
                             std::span<const double> z_ij) {
  if (w_i.size() != u_ij.size() || z_ij.size() != u_ij.size()) throw std::invalid_argument("u-update dimension mismatch");
  std::vector<double> out(u_ij.begin(), u_ij.end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += w_i[k] - z_ij[k];
  return out;
}

Residuals residuals(const MecTopology& topology, std::span<const std::vector<double>> w,
                    std::span<const EdgeState> current, std::span<const EdgeState> previous, double rho) {
  const auto& edges = topology.edges();
  if (current.size() != edges.size() || previous.size() != edges.size()) {
    throw std::invalid_argument("edge state count mismatch");
  }
  double primal = 0.0;
  double dual = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& wa = w[static_cast<std::size_t>(edges[e].a)];
    const auto& wb = w[static_cast<std::size_t>(edges[e].b)];
    primal += sq_dist(wa, current[e].z_ab);
    primal += sq_dist(wb, current[e].z_ba);
    dual += sq_dist(current[e].z_ab, previous[e].z_ab);
    dual += sq_dist(current[e].z_ba, previous[e].z_ba);
  }
  return Residuals{std::sqrt(primal), rho * std::sqrt(dual)};
}

double edge_weight(const MecEdge& edge, std::size_t n_a, std::size_t n_b, double gamma, EdgeWeighting mode) {
  if (mode == EdgeWeighting::symmetric) {
    return gamma * static_cast<double>(n_a + n_b) / (2.0 * edge.distance);
  }
  return gamma * static_cast<double>(n_b) / edge.distance;
}

AdmmState AdmmState::initial(const MecTopology& topology, const PartitionManifest& manifest, const SvmParams& svm) {
  svm.validate();
  if (manifest.node_datasets.size() != topology.node_count()) {
    throw std::invalid_argument("manifest has " + std::to_string(manifest.node_datasets.size()) +
                                " nodes but topology has " + std::to_string(topology.node_count()));
  }
  const std::size_t dim = manifest.feature_dim + 1;
  AdmmState state;
  state.nodes.resize(topology.node_count());
  for (const auto& nd : manifest.node_datasets) {
    if (nd.node_id < 0 || static_cast<std::size_t>(nd.node_id) >= topology.node_count()) {
      throw std::invalid_argument("manifest node id out of range");
    }
    auto& node = state.nodes[static_cast<std::size_t>(nd.node_id)];
    PackedSamples packed(nd.train, manifest.feature_dim);
    const double cost = svm.cost_for(packed.rows());
    node.solver = ProxSvmSolver(std::move(packed), cost);
    node.w.assign(dim, 0.0);
  }
  state.edges.assign(topology.edge_count(), EdgeState::zeros(dim));
  return state;
}

std::vector<std::vector<double>> AdmmState::weights() const {
  std::vector<std::vector<double>> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n.w);
  return out;
}

StageResult run_admm(const MecTopology& topology, const AdmmConfig& config, double gamma, AdmmState& state,
                     int stage, long long rounds_before) {
  config.validate();
  if (gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
  if (state.nodes.size() != topology.node_count() || state.edges.size() != topology.edge_count()) {
    throw std::invalid_argument("ADMM state does not match topology");
  }
  const auto& edges = topology.edges();
  const std::size_t dim = state.nodes.empty() ? 0 : state.nodes.front().w.size();
  const double eps_p = config.primal_threshold(2 * edges.size(), dim);
  const double eps_d = config.dual_threshold(2 * edges.size(), dim);

  std::vector<double> lambda(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    lambda[e] = edge_weight(edges[e], state.nodes[static_cast<std::size_t>(edges[e].a)].train_count(),
                            state.nodes[static_cast<std::size_t>(edges[e].b)].train_count(), gamma,
                            config.edge_weighting);
  }

  StageResult result;
  std::vector<EdgeState> previous;
  for (int it = 1; it <= config.max_iters; ++it) {
    for_each_index(state.nodes.size(), config.workers, [&](std::size_t i) {
      const int self = static_cast<int>(i);
      std::vector<IncidentVars> incident;
      for (std::size_t e : topology.incident_edges(self)) {
        const auto& es = state.edges[e];
        if (edges[e].a == self) {
          incident.push_back(IncidentVars{es.z_ab, es.u_ab});
        } else {
          incident.push_back(IncidentVars{es.z_ba, es.u_ba});
        }
      }
      try {
        state.nodes[i].w = w_update(state.nodes[i], incident, config);
      } catch (const ConvergenceError& err) {
        throw ConvergenceError(std::string(err.what()) + " [node " + std::to_string(i) + ", stage " +
                                   std::to_string(stage) + ", iteration " + std::to_string(it) + "]",
                               err.achieved_gap(), self, it);
      }
    });

    previous = state.edges;
    for_each_index(edges.size(), config.workers, [&](std::size_t e) {
      const auto& wa = state.nodes[static_cast<std::size_t>(edges[e].a)].w;
      const auto& wb = state.nodes[static_cast<std::size_t>(edges[e].b)].w;
      auto& es = state.edges[e];
      auto z = z_update(wa, wb, es.u_ab, es.u_ba, lambda[e], config.rho);
      es.z_ab = std::move(z.z_ij);
      es.z_ba = std::move(z.z_ji);
      es.u_ab = u_update(es.u_ab, wa, es.z_ab);
      es.u_ba = u_update(es.u_ba, wb, es.z_ba);
    });

    const auto w = state.weights();
    const auto res = residuals(topology, w, state.edges, previous, config.rho);
    result.trace.push_back(IterationTrace{stage, it, gamma, res.primal, res.dual, rounds_before + it});
    if (edges.empty() || (res.primal < eps_p && res.dual < eps_d)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::vector<double> gamma_schedule(const AdmmConfig& config) {
  config.validate();
  std::vector<double> out;
  const double limit = config.gamma_th * (1.0 + 1e-12);
  for (double g = config.gamma_ini; g <= limit; g *= config.gamma_inc) out.push_back(g);
  return out;
}

BootstrapResult bootstrap(const MecTopology& topology, const PartitionManifest& manifest, const AdmmConfig& config,
                          const StageObserver& observer) {
  config.validate();
  auto state = AdmmState::initial(topology, manifest, config.svm);
  BootstrapResult out;
  long long rounds = 0;
  int stage = 0;
  for (double gamma : gamma_schedule(config)) {
    auto res = run_admm(topology, config, gamma, state, stage, rounds);
    rounds = res.trace.empty() ? rounds : res.trace.back().rounds_so_far;
    StageSummary summary{stage, gamma, static_cast<int>(res.trace.size()), res.converged, rounds};
    out.stages.push_back(summary);
    out.trace.insert(out.trace.end(), res.trace.begin(), res.trace.end());
    if (observer) {
      const auto w = state.weights();
      observer(summary, w);
    }
    ++stage;
  }
  for (auto& n : state.nodes) out.models.emplace_back(std::move(n.w));
  return out;
}

}  // namespace mectrust
