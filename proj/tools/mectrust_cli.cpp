// mectrust command line: topology generation, data curation, training,
// sweeps and report rendering.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mectrust/errors.hpp"
#include "mectrust/harness.hpp"
#include "mectrust/manifest_io.hpp"
#include "mectrust/pipeline.hpp"
#include "mectrust/synthetic.hpp"
#include "mectrust/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mectrust;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConvergence = 2;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

MecTopology load_topology(const fs::path& path) { return MecTopology::from_json(read_json(path)); }

AdmmConfig load_config(const std::optional<std::string>& path) {
  AdmmConfig c;
  if (path) c = read_json(*path).get<AdmmConfig>();
  c.validate();
  return c;
}

// Data source for `prepare` and `sweep`: a CSV directory with a schema, or
// the built-in synthetic generator.
struct DataSource {
  std::vector<DeviceTable> devices;
  std::string dataset_name;
};

DataSource load_source(const json& j, std::uint64_t seed) {
  if (j.contains("synthetic")) {
    SyntheticSpec spec;
    const auto& s = j.at("synthetic");
    spec.devices = s.value("devices", spec.devices);
    spec.rows_per_device = s.value("rows_per_device", spec.rows_per_device);
    spec.numeric_features = s.value("numeric_features", spec.numeric_features);
    return {generate_devices(spec, s.value("seed", seed)), "synthetic-iot"};
  }
  const auto schema = Schema::load(j.at("schema").get<std::string>());
  return {load_devices(j.at("data").get<std::string>(), schema), schema.dataset_name};
}

PrepareOptions prepare_options(const json& j, const std::string& dataset_name) {
  PrepareOptions o;
  o.dataset_name = dataset_name;
  o.communities = j.value("communities", o.communities);
  o.community_sigmas = j.value("community_sigmas", o.community_sigmas);
  if (j.contains("sparse")) {
    const auto& s = j.at("sparse");
    SparseNodes sp;
    sp.node_fraction = s.value("node_fraction", sp.node_fraction);
    sp.train_range.min = s.value("min", sp.train_range.min);
    sp.train_range.max = s.value("max", sp.train_range.max);
    o.sparse = sp;
  }
  return o;
}

int run_topology(int nodes, int k, std::uint64_t seed, const std::string& out) {
  const auto t = generate_topology(nodes, k, seed);
  write_text(out, t.to_json().dump(2) + "\n");
  std::cout << "wrote " << t.node_count() << " nodes, " << t.edges().size() << " edges to " << out << "\n";
  return kExitOk;
}

int run_prepare(const std::string& data, const std::string& schema_path, const std::string& topo_path,
                std::uint64_t seed, const std::string& out, std::optional<double> sparse_fraction) {
  const auto schema = Schema::load(schema_path);
  const auto devices = load_devices(data, schema);
  auto topology = load_topology(topo_path);
  PrepareOptions o;
  o.dataset_name = schema.dataset_name;
  if (sparse_fraction) o.sparse = SparseNodes{*sparse_fraction, SizeRange{10, 500}};
  const auto manifest = prepare_partition(devices, topology, o, seed);
  write_manifest(manifest, out);
  std::cout << "wrote manifest for " << manifest.node_datasets.size() << " nodes, dimension " << manifest.feature_dim
            << ", digest " << manifest_digest(manifest) << "\n";
  return kExitOk;
}

int exit_code_for(const RunReport& r) {
  if (r.ok) return kExitOk;
  std::cerr << "error (" << r.error_kind << "): " << r.error_detail << "\n";
  return r.error_kind == "convergence" ? kExitConvergence : kExitValidation;
}

int run_train(const std::string& method, const std::string& topo_path, const std::string& manifest_dir,
              const std::optional<std::string>& config_path, std::uint64_t seed, const std::string& out,
              const std::optional<std::string>& trace) {
  const auto m = method_from_string(method);
  auto topology = load_topology(topo_path);
  const auto manifest = read_manifest(manifest_dir);
  for (const auto& nd : manifest.node_datasets) {
    if (static_cast<std::size_t>(nd.node_id) >= topology.node_count()) {
      throw ValidationError("manifest node " + std::to_string(nd.node_id) + " is not in the topology");
    }
    topology.set_sample_count(nd.node_id, nd.train.size());
  }
  const auto config = load_config(config_path);
  ExperimentOptions opts;
  opts.trace_path = trace;
  const auto report = run_experiment(m, topology, manifest, config, seed, opts);
  write_text(out, to_json(report).dump(2) + "\n");
  if (report.ok) {
    std::printf("%s: mean accuracy %.4f, rounds %lld, %.3f s\n", method_name(m), report.mean_accuracy, report.rounds,
                report.wall_time_seconds);
  }
  return exit_code_for(report);
}

// Sweep file keys: variable, values, repeats, seeds (optional), methods,
// config (inline object or path), source ({"data","schema"} or
// {"synthetic":{...}}), prepare, base_nodes, neighbor_degree, out.
int run_sweep_file(const std::string& spec_path) {
  const auto j = read_json(spec_path);
  SweepSpec spec;
  const auto variable = j.at("variable").get<std::string>();
  if (variable == "node_count") {
    spec.variable = SweepVariable::node_count;
  } else if (variable == "data_fraction") {
    spec.variable = SweepVariable::data_fraction;
  } else {
    throw ValidationError("unknown sweep variable '" + variable + "'");
  }
  spec.values = j.at("values").get<std::vector<double>>();
  spec.repeats = j.value("repeats", 1);
  spec.validate();

  std::vector<std::uint64_t> seeds = j.value("seeds", std::vector<std::uint64_t>{});
  const std::uint64_t data_seed = seeds.empty() ? 1 : seeds.front();
  const auto source = load_source(j.value("source", json{{"synthetic", json::object()}}), data_seed);

  SweepSetup setup;
  if (j.contains("methods")) {
    setup.methods.clear();
    for (const auto& m : j.at("methods")) setup.methods.push_back(method_from_string(m.get<std::string>()));
  }
  if (j.contains("config")) {
    const auto& c = j.at("config");
    setup.config = c.is_string() ? read_json(c.get<std::string>()).get<AdmmConfig>() : c.get<AdmmConfig>();
  }
  setup.config.validate();
  setup.base_nodes = j.value("base_nodes", setup.base_nodes);
  setup.neighbor_degree = j.value("neighbor_degree", setup.neighbor_degree);
  setup.devices = source.devices;
  setup.prepare = prepare_options(j.value("prepare", json::object()), source.dataset_name);

  const fs::path out = j.value("out", std::string("sweep_out"));
  fs::create_directories(out);
  const auto reports = run_sweep(spec, setup, seeds);
  int code = kExitOk;
  for (const auto& r : reports) {
    char name[128];
    std::snprintf(name, sizeof name, "%s_%s_%g_seed%llu.json", method_name(r.method), r.sweep_variable.c_str(),
                  r.sweep_value, static_cast<unsigned long long>(r.seed));
    write_text(out / name, to_json(r).dump(2) + "\n");
    if (!r.ok) code = std::max(code, exit_code_for(r));
  }
  const auto rows = aggregate(reports);
  write_text(out / "sweep.csv", render_sweep_csv(rows));
  std::cout << render_sweep_csv(rows);
  return code;
}

int run_report(const std::string& dir, const std::string& format) {
  ReportFormat f;
  if (format == "csv") {
    f = ReportFormat::csv;
  } else if (format == "markdown") {
    f = ReportFormat::markdown;
  } else {
    throw ValidationError("unknown format '" + format + "'");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunReport> reports;
  for (const auto& f : files) {
    const auto j = read_json(f);
    if (j.is_object() && j.contains("method") && j.contains("mean_accuracy")) reports.push_back(report_from_json(j));
  }
  std::cout << render_report(reports, f);
  return kExitOk;
}

int run_synth(std::uint64_t seed, int devices, std::size_t rows, const std::string& out) {
  SyntheticSpec spec;
  spec.devices = devices;
  spec.rows_per_device = rows;
  write_devices_csv(generate_devices(spec, seed), synthetic_schema(spec), out);
  std::cout << "wrote " << devices << " device files and schema.json to " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust bootstrapping across simulated MEC environments"};
  app.require_subcommand(1);

  int nodes = 15, k = kDefaultNeighborDegree, devices = 6;
  std::size_t rows = 12000;
  std::uint64_t seed = 1;
  std::string out, data, schema, topo, manifest, method, spec_path, in_dir, format = "csv";
  std::optional<std::string> config, trace;
  std::optional<double> sparse;

  auto* topology_cmd = app.add_subcommand("topology", "generate a random MEC topology");
  topology_cmd->add_option("--nodes", nodes, "number of MEC environments")->required();
  topology_cmd->add_option("--k", k, "nearest neighbours per node");
  topology_cmd->add_option("--seed", seed);
  topology_cmd->add_option("--out", out)->required();

  auto* prepare_cmd = app.add_subcommand("prepare", "curate CSV data into per-node datasets");
  prepare_cmd->add_option("--data", data, "directory of device CSV files")->required();
  prepare_cmd->add_option("--schema", schema, "schema JSON")->required();
  prepare_cmd->add_option("--topology", topo)->required();
  prepare_cmd->add_option("--seed", seed);
  prepare_cmd->add_option("--out", out, "manifest directory")->required();
  prepare_cmd->add_option("--sparse", sparse, "fraction of nodes capped to 10..500 training samples");

  auto* train_cmd = app.add_subcommand("train", "train and evaluate one method");
  train_cmd->add_option("--method", method)->required()->check(CLI::IsMember({"proposed", "global", "local"}));
  train_cmd->add_option("--topology", topo)->required();
  train_cmd->add_option("--manifest", manifest)->required();
  train_cmd->add_option("--config", config, "AdmmConfig JSON");
  train_cmd->add_option("--seed", seed);
  train_cmd->add_option("--out", out, "report JSON")->required();
  train_cmd->add_option("--trace", trace, "JSON-lines iteration trace");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a node-count or data-fraction sweep");
  sweep_cmd->add_option("--spec", spec_path)->required();

  auto* report_cmd = app.add_subcommand("report", "render report JSON files as a table");
  report_cmd->add_option("--in", in_dir)->required();
  report_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "markdown"}));

  auto* synth_cmd = app.add_subcommand("synth", "write the synthetic IoT surrogate as CSV");
  synth_cmd->add_option("--seed", seed);
  synth_cmd->add_option("--devices", devices);
  synth_cmd->add_option("--rows", rows, "rows per device");
  synth_cmd->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*topology_cmd) return run_topology(nodes, k, seed, out);
    if (*prepare_cmd) return run_prepare(data, schema, topo, seed, out, sparse);
    if (*train_cmd) return run_train(method, topo, manifest, config, seed, out, trace);
    if (*sweep_cmd) return run_sweep_file(spec_path);
    if (*report_cmd) return run_report(in_dir, format);
    if (*synth_cmd) return run_synth(seed, devices, rows, out);
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
