#include "mectrust/harness.hpp"

#include <cmath>
#include <stdexcept>

#include "mectrust/partition.hpp"

namespace mectrust {

const char* variable_name(SweepVariable v) {
  return v == SweepVariable::node_count ? "node_count" : "data_fraction";
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw std::invalid_argument("sweep values must be strictly increasing");
  }
  if (repeats < 1) throw std::invalid_argument("sweep repeats must be >= 1");
  for (double v : values) {
    if (variable == SweepVariable::node_count && (v < 1 || v != std::floor(v))) {
      throw std::invalid_argument("node counts must be positive integers");
    }
    if (variable == SweepVariable::data_fraction && !(v > 0.0 && v <= 1.0)) {
      throw std::invalid_argument("data fractions must lie in (0, 1]");
    }
  }
}

std::vector<RunReport> run_sweep(const SweepSpec& spec, const SweepSetup& setup, std::span<const std::uint64_t> seeds) {
  spec.validate();
  std::vector<std::uint64_t> seed_list(seeds.begin(), seeds.end());
  if (seed_list.empty()) {
    for (int r = 0; r < spec.repeats; ++r) seed_list.push_back(static_cast<std::uint64_t>(r + 1));
  }
  if (seed_list.size() < static_cast<std::size_t>(spec.repeats)) {
    throw std::invalid_argument("fewer seeds than sweep repeats");
  }

  std::vector<RunReport> out;
  for (double value : spec.values) {
    for (int r = 0; r < spec.repeats; ++r) {
      const auto seed = seed_list[static_cast<std::size_t>(r)];
      const int nodes = spec.variable == SweepVariable::node_count ? static_cast<int>(value) : setup.base_nodes;
      const int k = std::min(setup.neighbor_degree, std::max(1, nodes - 1));
      auto topology = generate_topology(nodes, k, seed);
      auto manifest = prepare_partition(setup.devices, topology, setup.prepare, seed);
      if (spec.variable == SweepVariable::data_fraction) {
        manifest = subsample_training(manifest, value, seed);
        for (const auto& nd : manifest.node_datasets) topology.set_sample_count(nd.node_id, nd.train.size());
      }
      for (auto method : setup.methods) {
        ExperimentOptions opts;
        opts.keep_models = false;
        auto report = run_experiment(method, topology, manifest, setup.config, seed, opts);
        report.sweep_variable = variable_name(spec.variable);
        report.sweep_value = value;
        out.push_back(std::move(report));
      }
    }
  }
  return out;
}

}  // namespace mectrust
