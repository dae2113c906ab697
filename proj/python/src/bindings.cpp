#include "risd2d/experiments.hpp"
#include "risd2d/link_opt.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace risd2d;

// Structured data crosses the boundary as JSON text; the Python package
// wraps these with json.loads/json.dumps.
namespace {

template <class T> T parse_or_default(const std::string &text) {
  T v;
  if (!text.empty()) json::parse(text).get_to(v);
  return v;
}

std::string solve_json(const std::string &scenario, const std::string &bcd,
                       const std::string &fading, std::uint64_t seed) {
  ScenarioConfig cfg = parse_or_default<ScenarioConfig>(scenario);
  cfg.rng_seed = seed;
  const BcdConfig b = parse_or_default<BcdConfig>(bcd);
  const FadingConfig f = parse_or_default<FadingConfig>(fading);
  const ChannelSet ch = generate_channels(generate_geometry(cfg), f, seed);
  const BcdOutput out = bcd_solve(ch, cfg, b);
  json j = {{"solution", out.solution},
            {"trace", out.trace},
            {"power_proportion", power_proportion_report(out.solution, ch)}};
  return j.dump();
}

std::string channels_json(const std::string &scenario, const std::string &fading,
                          std::uint64_t seed) {
  ScenarioConfig cfg = parse_or_default<ScenarioConfig>(scenario);
  cfg.rng_seed = seed;
  return json(generate_channels(generate_geometry(cfg),
                                parse_or_default<FadingConfig>(fading), seed))
      .dump();
}

std::string run_json(const std::string &spec_text) {
  const ExperimentSpec spec = json::parse(spec_text).get<ExperimentSpec>();
  py::gil_scoped_release release;
  return json(run_experiment(spec)).dump();
}

std::string replay_json(const std::string &record, double tol) {
  const ReplayCheck c = replay(json::parse(record).get<ReplayRecord>(), tol);
  return json{{"recorded_sum_rate", c.recorded_sum_rate},
              {"reevaluated_sum_rate", c.reevaluated_sum_rate},
              {"resolved_sum_rate", c.resolved_sum_rate},
              {"match", c.match}}
      .dump();
}

std::string record_json(const std::string &spec, double value,
                        const std::string &scheme, std::uint64_t seed) {
  return json(make_replay_record(json::parse(spec).get<ExperimentSpec>(), value,
                                 scheme_from_string(scheme), seed))
      .dump();
}

py::dict pair_solution(Complex h_d2d, Complex h_cu_dr, const CVector &h_cu_bs,
                       const CVector &h_dt_bs, double p_max_cu, double p_max_d2d,
                       double noise_dr, double noise_bs, double qos_threshold,
                       bool fixed_max) {
  const LinkParams p{p_max_cu, p_max_d2d, noise_dr, noise_bs, qos_threshold};
  const PairSolution s = solve_pair(h_d2d, h_cu_dr, h_cu_bs, h_dt_bs, p,
                                    fixed_max ? PowerMode::kFixedMax
                                              : PowerMode::kOptimal);
  py::dict d;
  d["p_d"] = s.p_d;
  d["p_c"] = s.p_c;
  d["w"] = s.w;
  d["rate_sum"] = s.rate_sum;
  d["rate_d2d"] = s.rate_d2d;
  d["rate_cu"] = s.rate_cu;
  d["feasible"] = s.feasible;
  d["candidate"] = to_string(s.which);
  return d;
}

} // namespace

PYBIND11_MODULE(_risd2d, m) {
  m.doc() = "RIS-assisted D2D resource allocation core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("solve", &solve_json, py::arg("scenario"), py::arg("bcd"), py::arg("fading"),
        py::arg("seed"));
  m.def("generate_channels", &channels_json, py::arg("scenario"), py::arg("fading"),
        py::arg("seed"));
  m.def("run_experiment", &run_json, py::arg("spec"));
  m.def("replay", &replay_json, py::arg("record"), py::arg("tol") = 1e-9);
  m.def("make_replay_record", &record_json, py::arg("spec"), py::arg("value"),
        py::arg("scheme"), py::arg("seed"));
  m.def("preset", [](const std::string &n) { return json(preset(n)).dump(); });
  m.def("preset_names", &preset_names);
  m.def("results_to_csv", [](const std::string &rows) {
    return results_to_csv(json::parse(rows).get<std::vector<ResultRow>>());
  });

  m.def("receive_beamformer", &receive_beamformer, py::arg("h_cu_bs"),
        py::arg("h_dt_bs"), py::arg("p_d"), py::arg("noise"));
  m.def("solve_pair", &pair_solution, py::arg("h_d2d"), py::arg("h_cu_dr"),
        py::arg("h_cu_bs"), py::arg("h_dt_bs"), py::arg("p_max_cu"),
        py::arg("p_max_d2d"), py::arg("noise_dr"), py::arg("noise_bs"),
        py::arg("qos_threshold"), py::arg("fixed_max") = false);
  m.def("lagrangian_dual_f", &lagrangian_dual_f, py::arg("zeta"), py::arg("gamma"));
  m.def("dbm_to_watts", &dbm_to_watts);
}
