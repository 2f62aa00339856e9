#include "mectrust/baselines.hpp"

#include <stdexcept>

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "mectrust/svm_solver.hpp"

namespace mectrust {

namespace {

TrustModel solve_plain(std::span<const Sample> samples, std::size_t feature_dim, const SvmParams& svm, double tol,
                       int max_epochs) {
  TrustModel model = TrustModel::zeros(feature_dim);
  if (samples.empty()) return model;
  PackedSamples packed(samples, feature_dim);
  const double cost = svm.cost_for(packed.rows());
  ProxSvmSolver solver(std::move(packed), cost);
  const std::vector<double> center(feature_dim + 1, 0.0);
  solver.solve(1.0, center, 0.0, tol, max_epochs, model.w);
  return model;
}

}  // namespace

GlobalBaseline train_global(const PartitionManifest& manifest, const SvmParams& svm, double tol, int max_epochs) {
  svm.validate();
  std::vector<Sample> pooled;
  pooled.reserve(manifest.pooled_train_count());
  for (const auto& nd : manifest.node_datasets) pooled.insert(pooled.end(), nd.train.begin(), nd.train.end());
  if (pooled.empty()) throw std::invalid_argument("global baseline needs at least one training sample");
  GlobalBaseline out;
  out.model = solve_plain(pooled, manifest.feature_dim, svm, tol, max_epochs);
  out.rounds = static_cast<long long>(pooled.size());
  return out;
}

std::vector<TrustModel> train_local(const PartitionManifest& manifest, const SvmParams& svm, double tol,
                                    int max_epochs, int workers) {
  svm.validate();
  const auto& nodes = manifest.node_datasets;
  std::vector<TrustModel> models(nodes.size());
  auto fit = [&](std::size_t i) { models[i] = solve_plain(nodes[i].train, manifest.feature_dim, svm, tol, max_epochs); };
  if (workers <= 1) {
    for (std::size_t i = 0; i < nodes.size(); ++i) fit(i);
  } else {
    tbb::task_arena arena(workers);
    arena.execute([&] { tbb::parallel_for(std::size_t{0}, nodes.size(), fit); });
  }
  return models;
}

}  // namespace mectrust
