#include "risd2d/serialization.hpp"

namespace risd2d {

namespace {

// Missing keys leave the default in place so spec files can be partial.
template <class T> void opt(const json &j, const char *key, T &field) {
  if (auto it = j.find(key); it != j.end()) it->get_to(field);
}

template <class T>
std::vector<T> list_from(const json &j, T (*conv)(const json &)) {
  std::vector<T> out;
  out.reserve(j.size());
  for (const auto &e : j) out.push_back(conv(e));
  return out;
}

} // namespace

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

Complex complex_from_json(const json &j) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError("complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json cvector_to_json(const CVector &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_to_json(v(i)));
  return a;
}

CVector cvector_from_json(const json &j) {
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

json cmatrix_to_json(const CMatrix &m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      data.push_back(complex_to_json(m(r, c)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

CMatrix cmatrix_from_json(const json &j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json &data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw ConfigError("matrix data length does not match rows*cols");
  CMatrix m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(data[i++]);
  return m;
}

json rvector_to_json(const RVector &v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

RVector rvector_from_json(const json &j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void to_json(json &j, const Point2 &p) { j = json::array({p.x, p.y}); }
void from_json(const json &j, Point2 &p) {
  p.x = j.at(0).get<double>();
  p.y = j.at(1).get<double>();
}

void to_json(json &j, const ScenarioConfig &c) {
  j = {{"num_cu", c.num_cu},
       {"num_d2d", c.num_d2d},
       {"num_ris", c.num_ris},
       {"elements_per_ris", c.elements_per_ris},
       {"bs_antennas", c.bs_antennas},
       {"p_max_cu", c.p_max_cu},
       {"p_max_d2d", c.p_max_d2d},
       {"noise_dr", c.noise_dr},
       {"noise_bs", c.noise_bs},
       {"qos_threshold", c.qos_threshold},
       {"cell_radius", c.cell_radius},
       {"ris_positions", c.ris_positions},
       {"cu_ring", c.cu_ring},
       {"d2d_distance", c.d2d_distance},
       {"rng_seed", c.rng_seed},
       {"cu_positions", c.cu_positions},
       {"dt_positions", c.dt_positions}};
}

void from_json(const json &j, ScenarioConfig &c) {
  opt(j, "num_cu", c.num_cu);
  opt(j, "num_d2d", c.num_d2d);
  opt(j, "num_ris", c.num_ris);
  opt(j, "elements_per_ris", c.elements_per_ris);
  opt(j, "bs_antennas", c.bs_antennas);
  opt(j, "p_max_cu", c.p_max_cu);
  opt(j, "p_max_d2d", c.p_max_d2d);
  if (auto it = j.find("p_max_dbm"); it != j.end())
    c.p_max_cu = c.p_max_d2d = dbm_to_watts(it->get<double>());
  opt(j, "noise_dr", c.noise_dr);
  opt(j, "noise_bs", c.noise_bs);
  if (auto it = j.find("noise_dbm"); it != j.end())
    c.noise_dr = c.noise_bs = dbm_to_watts(it->get<double>());
  opt(j, "qos_threshold", c.qos_threshold);
  opt(j, "cell_radius", c.cell_radius);
  opt(j, "ris_positions", c.ris_positions);
  opt(j, "cu_ring", c.cu_ring);
  opt(j, "d2d_distance", c.d2d_distance);
  opt(j, "rng_seed", c.rng_seed);
  opt(j, "cu_positions", c.cu_positions);
  opt(j, "dt_positions", c.dt_positions);
}

void to_json(json &j, const FadingConfig &c) {
  j = {{"taps_direct", c.taps_direct},
       {"taps_user_user", c.taps_user_user},
       {"taps_ris", c.taps_ris},
       {"pathloss_exp_bs_user", c.pathloss_exp_bs_user},
       {"pathloss_exp_ris", c.pathloss_exp_ris},
       {"pathloss_exp_user_user", c.pathloss_exp_user_user},
       {"rician_factor_ris_db", c.rician_factor_ris_db},
       {"reference_loss_db", c.reference_loss_db}};
}

void from_json(const json &j, FadingConfig &c) {
  opt(j, "taps_direct", c.taps_direct);
  opt(j, "taps_user_user", c.taps_user_user);
  opt(j, "taps_ris", c.taps_ris);
  opt(j, "pathloss_exp_bs_user", c.pathloss_exp_bs_user);
  opt(j, "pathloss_exp_ris", c.pathloss_exp_ris);
  opt(j, "pathloss_exp_user_user", c.pathloss_exp_user_user);
  opt(j, "rician_factor_ris_db", c.rician_factor_ris_db);
  opt(j, "reference_loss_db", c.reference_loss_db);
}

void to_json(json &j, const CsiErrorModel &c) {
  j = {{"g_cu_bs", c.g_cu_bs}, {"g_d2d", c.g_d2d},     {"f_cu_dr", c.f_cu_dr},
       {"f_dt_bs", c.f_dt_bs}, {"q_d2d", c.q_d2d},     {"q_cu_dr", c.q_cu_dr},
       {"q_cu_bs", c.q_cu_bs}, {"q_dt_bs", c.q_dt_bs}};
}

void from_json(const json &j, CsiErrorModel &c) {
  if (auto it = j.find("variance"); it != j.end())
    c = CsiErrorModel::uniform(it->get<double>());
  opt(j, "g_cu_bs", c.g_cu_bs);
  opt(j, "g_d2d", c.g_d2d);
  opt(j, "f_cu_dr", c.f_cu_dr);
  opt(j, "f_dt_bs", c.f_dt_bs);
  opt(j, "q_d2d", c.q_d2d);
  opt(j, "q_cu_dr", c.q_cu_dr);
  opt(j, "q_cu_bs", c.q_cu_bs);
  opt(j, "q_dt_bs", c.q_dt_bs);
}

void to_json(json &j, const ChannelSet &c) {
  auto vecs = [](const std::vector<CVector> &v) {
    json a = json::array();
    for (const auto &x : v) a.push_back(cvector_to_json(x));
    return a;
  };
  auto nested = [&](const std::vector<std::vector<CVector>> &v) {
    json a = json::array();
    for (const auto &x : v) a.push_back(vecs(x));
    return a;
  };
  json ris_bs = json::array();
  for (const auto &m : c.s_ris_bs) ris_bs.push_back(cmatrix_to_json(m));
  j = {{"num_cu", c.num_cu},
       {"num_d2d", c.num_d2d},
       {"num_ris", c.num_ris},
       {"elements_per_ris", c.elements_per_ris},
       {"bs_antennas", c.bs_antennas},
       {"g_cu_bs", vecs(c.g_cu_bs)},
       {"g_d2d", cvector_to_json(c.g_d2d)},
       {"f_cu_dr", cmatrix_to_json(c.f_cu_dr)},
       {"f_dt_bs", vecs(c.f_dt_bs)},
       {"s_cu_ris", nested(c.s_cu_ris)},
       {"s_ris_bs", ris_bs},
       {"s_dt_ris", nested(c.s_dt_ris)},
       {"s_ris_dr", nested(c.s_ris_dr)}};
}

void from_json(const json &j, ChannelSet &c) {
  auto nested = [](const json &a) {
    std::vector<std::vector<CVector>> out;
    for (const auto &x : a) out.push_back(list_from<CVector>(x, cvector_from_json));
    return out;
  };
  c.num_cu = j.at("num_cu").get<int>();
  c.num_d2d = j.at("num_d2d").get<int>();
  c.num_ris = j.at("num_ris").get<int>();
  c.elements_per_ris = j.at("elements_per_ris").get<int>();
  c.bs_antennas = j.at("bs_antennas").get<int>();
  c.g_cu_bs = list_from<CVector>(j.at("g_cu_bs"), cvector_from_json);
  c.g_d2d = cvector_from_json(j.at("g_d2d"));
  c.f_cu_dr = cmatrix_from_json(j.at("f_cu_dr"));
  c.f_dt_bs = list_from<CVector>(j.at("f_dt_bs"), cvector_from_json);
  c.s_cu_ris = nested(j.at("s_cu_ris"));
  c.s_ris_bs = list_from<CMatrix>(j.at("s_ris_bs"), cmatrix_from_json);
  c.s_dt_ris = nested(j.at("s_dt_ris"));
  c.s_ris_dr = nested(j.at("s_ris_dr"));
  c.validate();
}

void to_json(json &j, const PhaseVector &p) { j = cvector_to_json(p.values()); }
void from_json(const json &j, PhaseVector &p) { p = PhaseVector(cvector_from_json(j)); }

void to_json(json &j, const Pairing &p) {
  j = {{"num_cu", p.num_cu()}, {"partner", p.partners()}};
}
void from_json(const json &j, Pairing &p) {
  p = Pairing(j.at("num_cu").get<int>(), j.at("partner").get<std::vector<int>>());
}

void to_json(json &j, const PowerAllocation &p) {
  j = {{"p_cu", rvector_to_json(p.p_cu)}, {"p_d2d", rvector_to_json(p.p_d2d)}};
}
void from_json(const json &j, PowerAllocation &p) {
  p.p_cu = rvector_from_json(j.at("p_cu"));
  p.p_d2d = rvector_from_json(j.at("p_d2d"));
}

void to_json(json &j, const BeamformerSet &b) {
  j = json::array();
  for (const auto &w : b.w) j.push_back(cvector_to_json(w));
}
void from_json(const json &j, BeamformerSet &b) {
  b.w = list_from<CVector>(j, cvector_from_json);
}

void to_json(json &j, const NoiseLevels &n) {
  j = {{"dr", rvector_to_json(n.dr)}, {"bs", rvector_to_json(n.bs)}};
}
void from_json(const json &j, NoiseLevels &n) {
  n.dr = rvector_from_json(j.at("dr"));
  n.bs = rvector_from_json(j.at("bs"));
}

void to_json(json &j, const SinrReport &r) {
  j = {{"gamma_d2d", rvector_to_json(r.gamma_d2d)},
       {"gamma_cu", rvector_to_json(r.gamma_cu)},
       {"rate_d2d", rvector_to_json(r.rate_d2d)},
       {"rate_cu", rvector_to_json(r.rate_cu)},
       {"sum_rate", r.sum_rate}};
}
void from_json(const json &j, SinrReport &r) {
  r.gamma_d2d = rvector_from_json(j.at("gamma_d2d"));
  r.gamma_cu = rvector_from_json(j.at("gamma_cu"));
  r.rate_d2d = rvector_from_json(j.at("rate_d2d"));
  r.rate_cu = rvector_from_json(j.at("rate_cu"));
  r.sum_rate = j.at("sum_rate").get<double>();
}

void to_json(json &j, const SolutionState &s) {
  j = {{"pairing", s.pairing}, {"powers", s.powers},   {"beams", s.beams},
       {"phi", s.phi},         {"report", s.report},   {"noise", s.noise},
       {"infeasible", s.infeasible}, {"silent_d2d", s.silent_d2d}};
}
void from_json(const json &j, SolutionState &s) {
  j.at("pairing").get_to(s.pairing);
  j.at("powers").get_to(s.powers);
  j.at("beams").get_to(s.beams);
  j.at("phi").get_to(s.phi);
  j.at("report").get_to(s.report);
  j.at("noise").get_to(s.noise);
  j.at("infeasible").get_to(s.infeasible);
  j.at("silent_d2d").get_to(s.silent_d2d);
}

void to_json(json &j, const BcdTrace &t) {
  j = {{"sum_rate", t.sum_rate},
       {"candidate_rate", t.candidate_rate},
       {"pairings", t.pairings},
       {"min_qos_residual", t.min_qos_residual},
       {"step1_seconds", t.step1_seconds},
       {"step2_seconds", t.step2_seconds},
       {"decrease_events", t.decrease_events},
       {"max_decrease", t.max_decrease},
       {"iterations", t.iterations},
       {"converged", t.converged}};
}
void from_json(const json &j, BcdTrace &t) {
  j.at("sum_rate").get_to(t.sum_rate);
  j.at("candidate_rate").get_to(t.candidate_rate);
  j.at("pairings").get_to(t.pairings);
  j.at("min_qos_residual").get_to(t.min_qos_residual);
  j.at("step1_seconds").get_to(t.step1_seconds);
  j.at("step2_seconds").get_to(t.step2_seconds);
  j.at("decrease_events").get_to(t.decrease_events);
  j.at("max_decrease").get_to(t.max_decrease);
  j.at("iterations").get_to(t.iterations);
  j.at("converged").get_to(t.converged);
}

void to_json(json &j, const RgdConfig &c) {
  j = {{"max_iter", c.max_iter},       {"initial_step", c.initial_step},
       {"backtrack", c.backtrack},     {"armijo_c", c.armijo_c},
       {"max_backtracks", c.max_backtracks}, {"grad_tol", c.grad_tol}};
}
void from_json(const json &j, RgdConfig &c) {
  opt(j, "max_iter", c.max_iter);
  opt(j, "initial_step", c.initial_step);
  opt(j, "backtrack", c.backtrack);
  opt(j, "armijo_c", c.armijo_c);
  opt(j, "max_backtracks", c.max_backtracks);
  opt(j, "grad_tol", c.grad_tol);
}

void to_json(json &j, const AdmmConfig &c) {
  j = {{"penalty", c.penalty},
       {"max_iter", c.max_iter},
       {"tol", c.tol},
       {"residual_balancing", c.residual_balancing},
       {"restarts", c.restarts},
       {"seed", c.seed},
       {"bisection_tol", c.bisection_tol},
       {"parallel_min_dim", c.parallel_min_dim},
       {"rgd", c.rgd}};
}
void from_json(const json &j, AdmmConfig &c) {
  opt(j, "penalty", c.penalty);
  opt(j, "max_iter", c.max_iter);
  opt(j, "tol", c.tol);
  opt(j, "residual_balancing", c.residual_balancing);
  opt(j, "restarts", c.restarts);
  opt(j, "seed", c.seed);
  opt(j, "bisection_tol", c.bisection_tol);
  opt(j, "parallel_min_dim", c.parallel_min_dim);
  opt(j, "rgd", c.rgd);
}

void to_json(json &j, const FpConfig &c) {
  j = {{"max_iter", c.max_iter},
       {"rel_tol", c.rel_tol},
       {"qos_slack", c.qos_slack},
       {"admm", c.admm}};
}
void from_json(const json &j, FpConfig &c) {
  opt(j, "max_iter", c.max_iter);
  opt(j, "rel_tol", c.rel_tol);
  opt(j, "qos_slack", c.qos_slack);
  opt(j, "admm", c.admm);
}

const char *to_string(PowerMode m) {
  return m == PowerMode::kFixedMax ? "fixed-max" : "optimal";
}

PowerMode power_mode_from_string(const std::string &s) {
  if (s == "optimal") return PowerMode::kOptimal;
  if (s == "fixed-max") return PowerMode::kFixedMax;
  throw ConfigError("unknown power mode: " + s);
}

void to_json(json &j, const BcdConfig &c) {
  j = {{"max_outer_iter", c.max_outer_iter},
       {"rel_tol", c.rel_tol},
       {"decrease_slack", c.decrease_slack},
       {"fp", c.fp},
       {"robust", c.robust},
       {"power_mode", to_string(c.power_mode)},
       {"optimize_phase", c.optimize_phase}};
  j["csi"] = c.csi ? json(*c.csi) : json(nullptr);
  j["phi_init"] = c.phi_init ? json(*c.phi_init) : json(nullptr);
}

void from_json(const json &j, BcdConfig &c) {
  opt(j, "max_outer_iter", c.max_outer_iter);
  opt(j, "rel_tol", c.rel_tol);
  opt(j, "decrease_slack", c.decrease_slack);
  opt(j, "fp", c.fp);
  opt(j, "robust", c.robust);
  if (auto it = j.find("power_mode"); it != j.end())
    c.power_mode = power_mode_from_string(it->get<std::string>());
  opt(j, "optimize_phase", c.optimize_phase);
  if (auto it = j.find("csi"); it != j.end() && !it->is_null())
    c.csi = it->get<CsiErrorModel>();
  if (auto it = j.find("phi_init"); it != j.end() && !it->is_null())
    c.phi_init = it->get<PhaseVector>();
}

} // namespace risd2d
