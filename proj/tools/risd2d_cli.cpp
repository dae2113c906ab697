// risd2d command-line front end.
#include "risd2d/experiments.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

using namespace risd2d;

namespace {

json load_json(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception &e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

ExportFormat format_for(const std::string &path, const std::string &flag) {
  if (flag == "csv") return ExportFormat::kCsv;
  if (flag == "json") return ExportFormat::kJson;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return ExportFormat::kJson;
  return ExportFormat::kCsv;
}

void to_bits(std::vector<ResultRow> &rows) {
  const double k = 1.0 / std::numbers::ln2;
  for (auto &r : rows) {
    r.mean_sum_rate *= k;
    r.std_sum_rate *= k;
    r.mean_rate_d2d *= k;
    r.mean_rate_cu *= k;
  }
}

void print_rows(const std::vector<ResultRow> &rows, bool bits) {
  std::printf("%-12s %-16s %6s %12s %10s %8s %8s %6s\n", "value", "scheme",
              "seeds", bits ? "rate[bit]" : "rate[nat]", "std", "qos_viol",
              "infeas", "iters");
  for (const auto &r : rows)
    std::printf("%-12g %-16s %6d %12.5f %10.5f %8.3f %8.3f %6.2f%s\n",
                r.sweep_value, r.scheme.c_str(), r.num_seeds, r.mean_sum_rate,
                r.std_sum_rate, r.qos_violation_fraction, r.infeasible_fraction,
                r.mean_outer_iterations,
                r.num_errors ? (" errors=" + std::to_string(r.num_errors)).c_str()
                             : "");
}

int run_spec(ExperimentSpec spec, const std::string &out, const std::string &fmt,
             bool bits, bool quiet) {
  std::vector<InstanceResult> instances;
  auto rows = run_experiment(spec, &instances);
  if (bits) to_bits(rows);
  if (!quiet) print_rows(rows, bits);
  const std::string path = out.empty() ? spec.output_path : out;
  if (!path.empty()) {
    const ExportFormat f = format_for(path, fmt);
    export_results(rows, f, path, &spec,
                   f == ExportFormat::kJson ? &instances : nullptr);
    if (!quiet) std::cout << "wrote " << path << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"RIS-assisted D2D underlay sum-rate optimizer"};
  app.require_subcommand(1);

  std::string out, fmt, spec_path;
  bool bits = false, quiet = false, traces = false;
  int seeds = 0, workers = 0;

  auto *run = app.add_subcommand("run", "Run an experiment spec file");
  run->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  run->add_option("-o,--out", out, "Output path (.csv or .json)");
  run->add_option("--format", fmt, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--seeds", seeds, "Override num_seeds");
  run->add_option("--workers", workers, "Worker threads");
  run->add_flag("--traces", traces, "Keep per-instance solutions in JSON output");
  run->add_flag("--bits", bits, "Report rates in bit/s/Hz");
  run->add_flag("-q,--quiet", quiet);

  std::string preset_name;
  bool list = false;
  auto *pre = app.add_subcommand("preset", "Run a named study");
  pre->add_option("name", preset_name, "Preset name");
  pre->add_flag("--list", list, "List presets");
  pre->add_option("-o,--out", out, "Output path (.csv or .json)");
  pre->add_option("--format", fmt, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  pre->add_option("--seeds", seeds, "Override num_seeds");
  pre->add_option("--workers", workers, "Worker threads");
  pre->add_flag("--traces", traces, "Keep per-instance solutions in JSON output");
  pre->add_flag("--bits", bits, "Report rates in bit/s/Hz");
  pre->add_flag("-q,--quiet", quiet);
  bool dump = false;
  pre->add_flag("--dump", dump, "Print the preset spec as JSON and exit");

  double value = 0.0;
  std::string scheme = "proposed";
  std::uint64_t seed = 1;
  auto *solve = app.add_subcommand("solve", "Solve one instance and write a replay record");
  solve->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  solve->add_option("--value", value, "Sweep value (default: first in spec)");
  solve->add_option("--scheme", scheme, "Scheme name");
  solve->add_option("--seed", seed, "Instance seed");
  solve->add_option("-o,--out", out, "Record path")->required();

  std::string record_path;
  double tol = 1e-9;
  auto *rep = app.add_subcommand("replay", "Re-evaluate and re-solve a replay record");
  rep->add_option("record", record_path, "Record written by solve")->required();
  rep->add_option("--tol", tol, "Relative tolerance");

  auto *gen = app.add_subcommand("gen-channels", "Write one channel realization");
  gen->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  gen->add_option("--value", value, "Sweep value (default: first in spec)");
  gen->add_option("--seed", seed, "Realization seed");
  gen->add_option("-o,--out", out, "Output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto load_spec = [&] {
      ExperimentSpec s = load_json(spec_path).get<ExperimentSpec>();
      if (seeds > 0) s.num_seeds = seeds;
      if (workers > 0) s.workers = workers;
      if (traces) s.save_traces = true;
      return s;
    };
    if (*run) return run_spec(load_spec(), out, fmt, bits, quiet);

    if (*pre) {
      if (list || preset_name.empty()) {
        for (const auto &n : preset_names()) std::cout << n << "\n";
        return 0;
      }
      ExperimentSpec s = preset(preset_name);
      if (seeds > 0) s.num_seeds = seeds;
      if (workers > 0) s.workers = workers;
      if (traces) s.save_traces = true;
      if (dump) {
        std::cout << json(s).dump(2) << "\n";
        return 0;
      }
      return run_spec(s, out, fmt, bits, quiet);
    }

    if (*solve) {
      const ExperimentSpec s = load_spec();
      const bool has_value = solve->count("--value") > 0;
      const double v = has_value ? value : s.values.at(0);
      const Scheme sc = scheme_from_string(scheme);
      const ReplayRecord rec = make_replay_record(s, v, sc, seed);
      json j = rec;
      j["power_proportion"] = power_proportion_report(rec.solution, rec.channels);
      write_file_atomic(out, j.dump(1) + "\n");
      std::printf("sum rate %.10f nats, %d outer iterations%s\n",
                  rec.solution.report.sum_rate, rec.trace.iterations,
                  rec.solution.infeasible ? " (flagged infeasible)" : "");
      return 0;
    }

    if (*rep) {
      const ReplayRecord rec = load_json(record_path).get<ReplayRecord>();
      const ReplayCheck c = replay(rec, tol);
      std::printf("recorded    %.15g\nreevaluated %.15g\nresolved    %.15g\n%s\n",
                  c.recorded_sum_rate, c.reevaluated_sum_rate,
                  c.resolved_sum_rate, c.match ? "MATCH" : "MISMATCH");
      return c.match ? 0 : 2;
    }

    if (*gen) {
      const ExperimentSpec s = load_spec();
      const bool has_value = gen->count("--value") > 0;
      const InstanceInputs in = prepare_instance(
          s, has_value ? value : s.values.at(0), Scheme::kProposed, seed);
      write_file_atomic(out, json(in.channels).dump(1) + "\n");
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
