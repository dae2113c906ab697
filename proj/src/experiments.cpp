#include "risd2d/experiments.hpp"
#include "risd2d/parallel.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace risd2d {

namespace {

constexpr std::uint64_t kTagRandomPhase = 0x7261'6e64'7068'6173ULL;

struct Named {
  const char *name;
  int id;
};

constexpr Named kSweepNames[] = {
    {"N", 0},   {"M", 1},   {"P", 2},
    {"qos", 3}, {"J", 4},   {"dt_x", 5},
    {"total_elements", 6},  {"deployment", 7},
};

constexpr Named kSchemeNames[] = {
    {"proposed", 0},        {"no-ris", 1},          {"random-phase", 2},
    {"fixed-max-power", 3}, {"centralized-ris", 4}, {"distributed-ris", 5},
};

template <std::size_t N>
int lookup(const Named (&table)[N], const std::string &s, const char *what) {
  for (const auto &e : table)
    if (s == e.name) return e.id;
  throw ConfigError(std::string("unknown ") + what + ": " + s);
}

int as_count(double v, const char *what) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9 || r < 0)
    throw ConfigError(std::string(what) + " sweep value must be a nonnegative integer");
  return static_cast<int>(r);
}

bool same_double(double a, double b) {
  return a == b || (std::isnan(a) && std::isnan(b));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

const char *to_string(SweepVariable v) { return kSweepNames[int(v)].name; }
SweepVariable sweep_variable_from_string(const std::string &s) {
  return static_cast<SweepVariable>(lookup(kSweepNames, s, "sweep variable"));
}
const char *to_string(Scheme s) { return kSchemeNames[int(s)].name; }
Scheme scheme_from_string(const std::string &s) {
  return static_cast<Scheme>(lookup(kSchemeNames, s, "scheme"));
}

void ExperimentSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep values must be nonempty");
  if (num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  scenario.validate();
  fading.validate();
  bcd.validate();
  if (csi) csi->validate();
  for (double v : values) apply_sweep(scenario, sweep, v).validate();
}

void to_json(json &j, const ExperimentSpec &s) {
  json baselines = json::array();
  for (Scheme b : s.baselines) baselines.push_back(to_string(b));
  j = {{"name", s.name},
       {"scenario", s.scenario},
       {"fading", s.fading},
       {"bcd", s.bcd},
       {"sweep", to_string(s.sweep)},
       {"values", s.values},
       {"num_seeds", s.num_seeds},
       {"seed_base", s.seed_base},
       {"baselines", baselines},
       {"workers", s.workers},
       {"output_path", s.output_path},
       {"save_traces", s.save_traces}};
  j["csi"] = s.csi ? json(*s.csi) : json(nullptr);
}

void from_json(const json &j, ExperimentSpec &s) {
  auto opt = [&](const char *k, auto &field) {
    if (auto it = j.find(k); it != j.end()) it->get_to(field);
  };
  opt("name", s.name);
  opt("scenario", s.scenario);
  opt("fading", s.fading);
  opt("bcd", s.bcd);
  if (auto it = j.find("sweep"); it != j.end())
    s.sweep = sweep_variable_from_string(it->get<std::string>());
  opt("values", s.values);
  opt("num_seeds", s.num_seeds);
  opt("seed_base", s.seed_base);
  if (auto it = j.find("baselines"); it != j.end()) {
    s.baselines.clear();
    for (const auto &b : *it) s.baselines.push_back(scheme_from_string(b));
  }
  if (auto it = j.find("csi"); it != j.end() && !it->is_null())
    s.csi = it->get<CsiErrorModel>();
  opt("workers", s.workers);
  opt("output_path", s.output_path);
  opt("save_traces", s.save_traces);
}

bool ResultRow::same_values(const ResultRow &o) const {
  return same_double(sweep_value, o.sweep_value) && scheme == o.scheme &&
         num_seeds == o.num_seeds && num_errors == o.num_errors &&
         same_double(mean_sum_rate, o.mean_sum_rate) &&
         same_double(std_sum_rate, o.std_sum_rate) &&
         same_double(mean_rate_d2d, o.mean_rate_d2d) &&
         same_double(mean_rate_cu, o.mean_rate_cu) &&
         same_double(qos_violation_fraction, o.qos_violation_fraction) &&
         same_double(infeasible_fraction, o.infeasible_fraction) &&
         same_double(mean_outer_iterations, o.mean_outer_iterations);
}

ScenarioConfig centralized_deployment(ScenarioConfig cfg, int total_elements) {
  if (total_elements < 1) throw ConfigError("deployment needs >= 1 element");
  cfg.num_ris = 1;
  cfg.elements_per_ris = total_elements;
  cfg.ris_positions = {{cfg.cell_radius, 0.0}};
  return cfg;
}

ScenarioConfig distributed_deployment(ScenarioConfig cfg, int total_elements) {
  if (total_elements < 4 || total_elements % 4 != 0)
    throw ConfigError("distributed deployment needs a multiple of 4 elements");
  const double r = cfg.cell_radius;
  cfg.num_ris = 4;
  cfg.elements_per_ris = total_elements / 4;
  cfg.ris_positions = {{0.0, r}, {r, 0.0}, {0.0, -r}, {-r, 0.0}};
  return cfg;
}

ScenarioConfig apply_sweep(ScenarioConfig cfg, SweepVariable v, double value) {
  switch (v) {
  case SweepVariable::kN:
    cfg.elements_per_ris = as_count(value, "N");
    break;
  case SweepVariable::kM:
    cfg.bs_antennas = as_count(value, "M");
    break;
  case SweepVariable::kP:
    cfg.p_max_cu = cfg.p_max_d2d = dbm_to_watts(value);
    break;
  case SweepVariable::kQos:
    cfg.qos_threshold = value;
    break;
  case SweepVariable::kJ:
    cfg.num_d2d = as_count(value, "J");
    if (!cfg.dt_positions.empty())
      cfg.dt_positions.resize(cfg.num_d2d, cfg.dt_positions.back());
    break;
  case SweepVariable::kDtX:
    cfg.dt_positions.assign(cfg.num_d2d, Point2{value, 0.0});
    break;
  case SweepVariable::kTotalElements: {
    const int total = as_count(value, "total_elements");
    if (cfg.num_ris < 1 || total % cfg.num_ris != 0)
      throw ConfigError("total_elements must be a multiple of num_ris");
    cfg.elements_per_ris = total / cfg.num_ris;
    break;
  }
  case SweepVariable::kDeployment: {
    const int mode = as_count(value, "deployment");
    if (mode > 1) throw ConfigError("deployment value must be 0 or 1");
    cfg = mode == 0 ? centralized_deployment(cfg, cfg.phase_dim())
                    : distributed_deployment(cfg, cfg.phase_dim());
    break;
  }
  }
  return cfg;
}

ChannelSet strip_ris(const ChannelSet &ch) {
  ChannelSet out = ch;
  out.num_ris = 0;
  out.s_cu_ris.clear();
  out.s_ris_bs.clear();
  out.s_dt_ris.clear();
  out.s_ris_dr.clear();
  return out;
}

InstanceInputs prepare_instance(const ExperimentSpec &spec, double sweep_value,
                                Scheme scheme, std::uint64_t seed) {
  InstanceInputs in;
  ScenarioConfig cfg = apply_sweep(spec.scenario, spec.sweep, sweep_value);
  cfg.rng_seed = seed;
  BcdConfig bcd = spec.bcd;
  bcd.fp.admm.seed = spec.bcd.fp.admm.seed ^ (seed * 0x9e3779b97f4a7c15ULL);
  switch (scheme) {
  case Scheme::kCentralized:
    cfg = centralized_deployment(cfg, cfg.phase_dim());
    break;
  case Scheme::kDistributed:
    cfg = distributed_deployment(cfg, cfg.phase_dim());
    break;
  case Scheme::kFixedMaxPower:
    bcd.power_mode = PowerMode::kFixedMax;
    break;
  default:
    break;
  }
  in.channels = generate_channels(generate_geometry(cfg), spec.fading, seed);
  if (scheme == Scheme::kNoRis) {
    in.channels = strip_ris(in.channels);
    cfg.num_ris = 0;
    cfg.ris_positions.clear();
    bcd.phi_init.reset();
  }
  if (scheme == Scheme::kRandomPhase) {
    auto rng = make_stream(seed, {kTagRandomPhase});
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    RVector angles(cfg.phase_dim());
    for (Eigen::Index i = 0; i < angles.size(); ++i) angles(i) = u(rng);
    bcd.phi_init = PhaseVector::from_angles(angles);
    bcd.optimize_phase = false;
  }
  if (spec.csi) {
    bcd.robust = true;
    bcd.csi = spec.csi;
  }
  in.scenario = cfg;
  in.bcd = bcd;
  return in;
}

namespace {

BcdOutput solve_inputs(const InstanceInputs &in, std::uint64_t seed) {
  if (in.bcd.robust && in.bcd.csi) {
    const CsiRealization est = apply_csi_error(in.channels, *in.bcd.csi, seed);
    return robust_bcd_solve(est.estimated, *in.bcd.csi, in.scenario, in.bcd);
  }
  return bcd_solve(in.channels, in.scenario, in.bcd);
}

CascadedChannels solver_view(const ChannelSet &channels,
                             const std::optional<CsiErrorModel> &csi,
                             std::uint64_t seed) {
  if (csi) return apply_csi_error(channels, *csi, seed).estimated;
  return cascade(channels);
}

} // namespace

InstanceResult run_instance(const ExperimentSpec &spec, double sweep_value,
                            Scheme scheme, std::uint64_t seed) {
  InstanceResult r;
  r.sweep_value = sweep_value;
  r.scheme = scheme;
  r.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const InstanceInputs in = prepare_instance(spec, sweep_value, scheme, seed);
    BcdOutput out = solve_inputs(in, seed);
    const SolutionState &s = out.solution;
    r.sum_rate = s.report.sum_rate;
    r.rate_d2d = s.report.rate_d2d.sum();
    r.rate_cu = s.report.rate_cu.sum();
    r.infeasible = s.infeasible;
    r.qos_violated = !matched_qos_feasible(s.report, s.pairing,
                                           in.scenario.qos_threshold, 1e-6);
    r.iterations = out.trace.iterations;
    r.converged = out.trace.converged;
    r.decrease_events = out.trace.decrease_events;
    r.max_decrease = out.trace.max_decrease;
    r.ok = true;
    if (spec.save_traces) {
      r.power = power_proportion_report(
          out.solution, solver_view(in.channels, in.bcd.csi, seed));
      r.output = std::move(out);
    }
  } catch (const std::exception &e) {
    r.ok = false;
    r.error = e.what();
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<ResultRow> aggregate(const std::vector<InstanceResult> &instances) {
  std::vector<ResultRow> rows;
  std::vector<std::vector<const InstanceResult *>> groups;
  for (const auto &inst : instances) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const ResultRow &r) {
      return r.sweep_value == inst.sweep_value && r.scheme == to_string(inst.scheme);
    });
    if (it == rows.end()) {
      ResultRow row;
      row.sweep_value = inst.sweep_value;
      row.scheme = to_string(inst.scheme);
      rows.push_back(row);
      groups.emplace_back();
      it = rows.end() - 1;
    }
    groups[it - rows.begin()].push_back(&inst);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t g = 0; g < rows.size(); ++g) {
    ResultRow &row = rows[g];
    row.num_seeds = static_cast<int>(groups[g].size());
    double n = 0, s = 0, d = 0, c = 0, q = 0, inf = 0, it = 0;
    for (const auto *p : groups[g]) {
      row.wall_seconds += p->wall_seconds;
      if (!p->ok) {
        ++row.num_errors;
        continue;
      }
      n += 1;
      s += p->sum_rate;
      d += p->rate_d2d;
      c += p->rate_cu;
      q += p->qos_violated;
      inf += p->infeasible;
      it += p->iterations;
    }
    if (n == 0) {
      row.mean_sum_rate = row.std_sum_rate = row.mean_rate_d2d = row.mean_rate_cu =
          row.qos_violation_fraction = row.infeasible_fraction =
              row.mean_outer_iterations = nan;
      continue;
    }
    row.mean_sum_rate = s / n;
    row.mean_rate_d2d = d / n;
    row.mean_rate_cu = c / n;
    row.qos_violation_fraction = q / n;
    row.infeasible_fraction = inf / n;
    row.mean_outer_iterations = it / n;
    double ss = 0;
    for (const auto *p : groups[g])
      if (p->ok) ss += (p->sum_rate - row.mean_sum_rate) * (p->sum_rate - row.mean_sum_rate);
    row.std_sum_rate = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  }
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec &spec,
                                      std::vector<InstanceResult> *instances) {
  spec.validate();
  std::vector<Scheme> schemes{Scheme::kProposed};
  for (Scheme b : spec.baselines)
    if (std::find(schemes.begin(), schemes.end(), b) == schemes.end())
      schemes.push_back(b);

  struct Task {
    double value;
    Scheme scheme;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double v : spec.values)
    for (Scheme s : schemes)
      for (int i = 0; i < spec.num_seeds; ++i)
        tasks.push_back({v, s, spec.seed_base + static_cast<std::uint64_t>(i)});

  std::vector<InstanceResult> results(tasks.size());
  const int workers = spec.workers > 0 ? spec.workers : default_workers();
  parallel_for(static_cast<int>(tasks.size()), workers, [&](int i) {
    const Task &t = tasks[i];
    results[i] = run_instance(spec, t.value, t.scheme, t.seed);
  });
  auto rows = aggregate(results);
  if (instances) *instances = std::move(results);
  return rows;
}

// ---- power decomposition ----

namespace {

void split(PowerComponents &pc, bool useful, double p, Complex direct,
           Complex reflected) {
  const double d = p * std::norm(direct);
  const double r = p * std::norm(reflected);
  const double x = 2.0 * p * std::real(std::conj(direct) * reflected);
  if (useful) {
    pc.direct_useful += d;
    pc.reflected_useful += r;
    pc.cross_useful += x;
  } else {
    pc.direct_interference += d;
    pc.reflected_interference += r;
    pc.cross_interference += x;
  }
}

void accumulate(PowerComponents &total, const PowerComponents &c) {
  total.direct_useful += c.direct_useful;
  total.reflected_useful += c.reflected_useful;
  total.cross_useful += c.cross_useful;
  total.direct_interference += c.direct_interference;
  total.reflected_interference += c.reflected_interference;
  total.cross_interference += c.cross_interference;
}

PowerComponents normalized(const PowerComponents &c) {
  const double m = std::max({c.direct_useful, c.reflected_useful,
                             c.direct_interference, c.reflected_interference});
  if (!(m > 0.0)) return c;
  return {c.direct_useful / m,       c.reflected_useful / m,
          c.cross_useful / m,        c.direct_interference / m,
          c.reflected_interference / m, c.cross_interference / m};
}

} // namespace

PowerProportionReport power_proportion_report(const SolutionState &sol,
                                              const CascadedChannels &ch) {
  const int J = ch.num_d2d, K = ch.num_cu;
  const CVector &phi = sol.phi.values();
  if (sol.phi.size() != ch.phase_dim) throw ConfigError("phase dimension");
  PowerProportionReport rep;
  rep.bs.resize(K);
  rep.dr.resize(J);
  for (int k = 0; k < K; ++k) {
    const CVector &w = sol.beams.w[k];
    const CVector refl = ch.q_cu_bs[k] * phi;
    split(rep.bs[k], true, sol.powers.p_cu(k), w.dot(ch.g_cu_bs[k]), w.dot(refl));
    const int j = sol.pairing.partner_of_cu(k);
    if (j >= 0) {
      const CVector refl_i = ch.q_dt_bs[j] * phi;
      split(rep.bs[k], false, sol.powers.p_d2d(j), w.dot(ch.f_dt_bs[j]),
            w.dot(refl_i));
    }
    accumulate(rep.bs_total, rep.bs[k]);
  }
  for (int j = 0; j < J; ++j) {
    split(rep.dr[j], true, sol.powers.p_d2d(j), ch.g_d2d(j),
          ch.q_d2d[j].dot(phi));
    const int k = sol.pairing.partner_of_d2d(j);
    if (k >= 0)
      split(rep.dr[j], false, sol.powers.p_cu(k), ch.f_cu_dr(k, j),
            ch.q_cu_dr[k][j].dot(phi));
    accumulate(rep.dr_total, rep.dr[j]);
  }
  rep.bs_normalized = normalized(rep.bs_total);
  rep.dr_normalized = normalized(rep.dr_total);
  return rep;
}

PowerProportionReport power_proportion_report(const SolutionState &sol,
                                              const ChannelSet &ch) {
  return power_proportion_report(sol, cascade(ch));
}

void to_json(json &j, const PowerComponents &c) {
  j = {{"direct_useful", c.direct_useful},
       {"reflected_useful", c.reflected_useful},
       {"cross_useful", c.cross_useful},
       {"direct_interference", c.direct_interference},
       {"reflected_interference", c.reflected_interference},
       {"cross_interference", c.cross_interference}};
}

void to_json(json &j, const PowerProportionReport &r) {
  j = {{"bs", r.bs},
       {"dr", r.dr},
       {"bs_total", r.bs_total},
       {"dr_total", r.dr_total},
       {"bs_normalized", r.bs_normalized},
       {"dr_normalized", r.dr_normalized}};
}

// ---- export ----

void to_json(json &j, const ResultRow &r) {
  j = {{"sweep_value", r.sweep_value},
       {"scheme", r.scheme},
       {"num_seeds", r.num_seeds},
       {"num_errors", r.num_errors},
       {"mean_sum_rate", r.mean_sum_rate},
       {"std_sum_rate", r.std_sum_rate},
       {"mean_rate_d2d", r.mean_rate_d2d},
       {"mean_rate_cu", r.mean_rate_cu},
       {"qos_violation_fraction", r.qos_violation_fraction},
       {"infeasible_fraction", r.infeasible_fraction},
       {"mean_outer_iterations", r.mean_outer_iterations},
       {"wall_seconds", r.wall_seconds}};
}

void from_json(const json &j, ResultRow &r) {
  auto num = [&](const char *k) {
    const json &v = j.at(k);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  r.sweep_value = num("sweep_value");
  r.scheme = j.at("scheme").get<std::string>();
  r.num_seeds = j.at("num_seeds").get<int>();
  r.num_errors = j.at("num_errors").get<int>();
  r.mean_sum_rate = num("mean_sum_rate");
  r.std_sum_rate = num("std_sum_rate");
  r.mean_rate_d2d = num("mean_rate_d2d");
  r.mean_rate_cu = num("mean_rate_cu");
  r.qos_violation_fraction = num("qos_violation_fraction");
  r.infeasible_fraction = num("infeasible_fraction");
  r.mean_outer_iterations = num("mean_outer_iterations");
  r.wall_seconds = num("wall_seconds");
}

json instance_to_json(const InstanceResult &r) {
  json j = {{"sweep_value", r.sweep_value},
            {"scheme", to_string(r.scheme)},
            {"seed", r.seed},
            {"ok", r.ok},
            {"error", r.error},
            {"sum_rate", r.sum_rate},
            {"rate_d2d", r.rate_d2d},
            {"rate_cu", r.rate_cu},
            {"qos_violated", r.qos_violated},
            {"infeasible", r.infeasible},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"decrease_events", r.decrease_events},
            {"max_decrease", r.max_decrease},
            {"wall_seconds", r.wall_seconds}};
  if (r.output) {
    j["solution"] = r.output->solution;
    j["trace"] = r.output->trace;
  }
  if (r.power) j["power_proportion"] = *r.power;
  return j;
}

void write_file_atomic(const std::string &path, const std::string &contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec)
      throw std::runtime_error("cannot create directory for " + path + ": " +
                               ec.message());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << contents;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move results into " + path);
  }
}

std::string results_to_csv(const std::vector<ResultRow> &rows) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto &r : rows) {
    if (r.scheme.find(',') != std::string::npos)
      throw ConfigError("scheme name contains a comma");
    os << fmt(r.sweep_value) << ',' << r.scheme << ',' << r.num_seeds << ','
       << r.num_errors << ',' << fmt(r.mean_sum_rate) << ','
       << fmt(r.std_sum_rate) << ',' << fmt(r.mean_rate_d2d) << ','
       << fmt(r.mean_rate_cu) << ',' << fmt(r.qos_violation_fraction) << ','
       << fmt(r.infeasible_fraction) << ',' << fmt(r.mean_outer_iterations)
       << ',' << fmt(r.wall_seconds) << '\n';
  }
  return os.str();
}

std::vector<ResultRow> results_from_csv(const std::string &text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw ConfigError("unexpected CSV header");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 12)
      throw ConfigError("CSV line " + std::to_string(lineno) + ": expected 12 fields");
    auto d = [&](int i) { return std::strtod(f[i].c_str(), nullptr); };
    ResultRow r;
    r.sweep_value = d(0);
    r.scheme = f[1];
    r.num_seeds = std::stoi(f[2]);
    r.num_errors = std::stoi(f[3]);
    r.mean_sum_rate = d(4);
    r.std_sum_rate = d(5);
    r.mean_rate_d2d = d(6);
    r.mean_rate_cu = d(7);
    r.qos_violation_fraction = d(8);
    r.infeasible_fraction = d(9);
    r.mean_outer_iterations = d(10);
    r.wall_seconds = d(11);
    rows.push_back(r);
  }
  return rows;
}

std::vector<ResultRow> read_results_csv(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  try {
    return results_from_csv(os.str());
  } catch (const std::exception &e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void export_results(const std::vector<ResultRow> &rows, ExportFormat format,
                    const std::string &path, const ExperimentSpec *spec,
                    const std::vector<InstanceResult> *instances) {
  if (rows.empty()) throw ConfigError("no result rows to export");
  if (format == ExportFormat::kCsv) {
    write_file_atomic(path, results_to_csv(rows));
    return;
  }
  json j;
  if (spec) j["spec"] = *spec;
  j["rows"] = rows;
  if (instances) {
    json a = json::array();
    for (const auto &inst : *instances) a.push_back(instance_to_json(inst));
    j["instances"] = a;
  }
  write_file_atomic(path, j.dump(1) + "\n");
}

// ---- replay ----

void to_json(json &j, const ReplayRecord &r) {
  j = {{"scenario", r.scenario}, {"fading", r.fading},     {"bcd", r.bcd},
       {"seed", r.seed},         {"scheme", r.scheme},     {"channels", r.channels},
       {"solution", r.solution}, {"trace", r.trace}};
  j["csi"] = r.csi ? json(*r.csi) : json(nullptr);
}

void from_json(const json &j, ReplayRecord &r) {
  j.at("scenario").get_to(r.scenario);
  j.at("fading").get_to(r.fading);
  j.at("bcd").get_to(r.bcd);
  j.at("seed").get_to(r.seed);
  j.at("scheme").get_to(r.scheme);
  j.at("channels").get_to(r.channels);
  j.at("solution").get_to(r.solution);
  j.at("trace").get_to(r.trace);
  if (auto it = j.find("csi"); it != j.end() && !it->is_null())
    r.csi = it->get<CsiErrorModel>();
}

ReplayRecord make_replay_record(const ExperimentSpec &spec, double sweep_value,
                                Scheme scheme, std::uint64_t seed) {
  const InstanceInputs in = prepare_instance(spec, sweep_value, scheme, seed);
  BcdOutput out = solve_inputs(in, seed);
  ReplayRecord rec;
  rec.scenario = in.scenario;
  rec.fading = spec.fading;
  rec.bcd = in.bcd;
  rec.csi = in.bcd.robust ? in.bcd.csi : std::nullopt;
  rec.seed = seed;
  rec.scheme = to_string(scheme);
  rec.channels = in.channels;
  rec.solution = std::move(out.solution);
  rec.trace = std::move(out.trace);
  return rec;
}

ReplayCheck replay(const ReplayRecord &rec, double tol) {
  ReplayCheck c;
  c.recorded_sum_rate = rec.solution.report.sum_rate;
  const CascadedChannels view = solver_view(rec.channels, rec.csi, rec.seed);
  const SolutionState &s = rec.solution;
  c.reevaluated_sum_rate =
      evaluate_sinr(view, s.phi, s.pairing, s.powers, s.beams, s.noise).sum_rate;
  InstanceInputs in{rec.scenario, rec.bcd, rec.channels};
  c.resolved_sum_rate = solve_inputs(in, rec.seed).solution.report.sum_rate;
  const double scale = std::max(1.0, std::abs(c.recorded_sum_rate));
  c.match = std::abs(c.reevaluated_sum_rate - c.recorded_sum_rate) <= tol * scale &&
            std::abs(c.resolved_sum_rate - c.recorded_sum_rate) <= tol * scale;
  return c;
}

// ---- presets ----

std::vector<std::string> preset_names() {
  return {"dt-position",   "bs-antennas",      "qos-threshold",
          "rate-split",    "deployment",       "max-power",
          "ris-elements",  "total-elements",   "d2d-pairs",
          "convergence",   "power-proportion", "robust-csi"};
}

ExperimentSpec preset(const std::string &name) {
  ExperimentSpec s;
  s.name = name;
  s.num_seeds = 20;
  ScenarioConfig &c = s.scenario;
  auto single_pair = [&] {
    c.num_cu = 1;
    c.num_d2d = 1;
  };
  if (name == "dt-position") {
    single_pair();
    c.cu_positions = {{400.0, 0.0}};
    s.sweep = SweepVariable::kDtX;
    s.values = {200, 225, 250, 275, 300};
    s.baselines = {Scheme::kNoRis, Scheme::kRandomPhase};
  } else if (name == "bs-antennas") {
    single_pair();
    s.sweep = SweepVariable::kM;
    s.values = {2, 4, 8};
    s.baselines = {Scheme::kNoRis, Scheme::kRandomPhase};
  } else if (name == "qos-threshold") {
    single_pair();
    c.elements_per_ris = 5;
    s.sweep = SweepVariable::kQos;
    s.values = {0.25, 0.5, 1.0, 2.0};
    s.baselines = {Scheme::kNoRis, Scheme::kRandomPhase};
  } else if (name == "rate-split") {
    single_pair();
    c.cu_positions = {{400.0, 0.0}};
    c.dt_positions = {{300.0, 0.0}};
    s.sweep = SweepVariable::kP;
    s.values = {0, 5, 10, 15, 20};
    s.baselines = {Scheme::kFixedMaxPower};
  } else if (name == "deployment") {
    c.num_cu = 2;
    c.num_d2d = 2;
    s.sweep = SweepVariable::kDeployment;
    s.values = {0, 1};
    s.baselines = {Scheme::kNoRis};
  } else if (name == "max-power") {
    s.sweep = SweepVariable::kP;
    s.values = {0, 5, 10, 15, 20};
    s.baselines = {Scheme::kNoRis, Scheme::kRandomPhase};
  } else if (name == "ris-elements") {
    s.sweep = SweepVariable::kN;
    s.values = {2, 4, 6, 8, 10};
    s.baselines = {Scheme::kNoRis, Scheme::kRandomPhase};
  } else if (name == "total-elements") {
    s.sweep = SweepVariable::kTotalElements;
    s.values = {8, 16, 24, 32, 40};
    s.baselines = {Scheme::kNoRis, Scheme::kRandomPhase};
  } else if (name == "d2d-pairs") {
    c.num_cu = 10;
    s.sweep = SweepVariable::kJ;
    s.values = {2, 4, 6, 8, 10};
    s.num_seeds = 10;
    s.baselines = {Scheme::kNoRis, Scheme::kRandomPhase};
  } else if (name == "convergence") {
    s.sweep = SweepVariable::kN;
    s.values = {10, 20};
    s.save_traces = true;
  } else if (name == "power-proportion") {
    s.sweep = SweepVariable::kP;
    s.values = {0, 5, 10, 15, 20};
    s.baselines = {Scheme::kNoRis};
    s.save_traces = true;
  } else if (name == "robust-csi") {
    s.sweep = SweepVariable::kP;
    s.values = {10, 13, 16};
    // About 1% of the mean entry power of each link class at the default
    // geometry.
    CsiErrorModel e;
    e.g_cu_bs = 1e-15;
    e.g_d2d = 1.6e-10;
    e.f_cu_dr = 2e-13;
    e.f_dt_bs = 2e-13;
    e.q_d2d = 2e-18;
    e.q_cu_dr = 6e-19;
    e.q_cu_bs = 3e-19;
    e.q_dt_bs = 5e-20;
    s.csi = e;
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  s.output_path = name + ".csv";
  return s;
}

} // namespace risd2d
