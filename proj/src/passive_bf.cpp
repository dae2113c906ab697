#include "risd2d/passive_bf.hpp"

#include "risd2d/parallel.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <numbers>

namespace risd2d {

namespace {

Complex lin(const Complex &c, const CVector &v, const CVector &phi) {
  return phi.size() > 0 ? c + v.dot(phi) : c;
}

// Interference-plus-noise terms shared by every FP quantity.
struct LinkPowers {
  RVector a_d, den_d; // D2D: useful, useful + interference + noise
  RVector a_c, den_c; // CU
  CVector s_d, s_c;   // complex useful amplitudes
};

LinkPowers link_powers(const AggregatedCascades &agg, const CVector &phi,
                       const Pairing &pairing, const NoiseLevels &noise) {
  const int J = static_cast<int>(agg.a.size());
  const int K = static_cast<int>(agg.alpha.size());
  LinkPowers lp;
  lp.a_d.resize(J);
  lp.den_d.resize(J);
  lp.s_d.resize(J);
  lp.a_c.resize(K);
  lp.den_c.resize(K);
  lp.s_c.resize(K);
  for (int j = 0; j < J; ++j) {
    lp.s_d(j) = lin(agg.g_tilde_d(j), agg.a[j], phi);
    lp.a_d(j) = std::norm(lp.s_d(j));
    double den = lp.a_d(j) + noise.dr(j);
    for (int k = 0; k < K; ++k)
      if (pairing.rho(j, k))
        den += std::norm(lin(agg.f_tilde_c(k, j), agg.b[k][j], phi));
    lp.den_d(j) = den;
  }
  for (int k = 0; k < K; ++k) {
    lp.s_c(k) = lin(agg.g_tilde_c(k), agg.alpha[k], phi);
    lp.a_c(k) = std::norm(lp.s_c(k));
    double den = lp.a_c(k) + noise.bs(k);
    for (int j = 0; j < J; ++j)
      if (pairing.rho(j, k))
        den += std::norm(lin(agg.f_tilde_d(j), agg.beta[j], phi));
    lp.den_c(k) = den;
  }
  return lp;
}

bool is_matched_cu(const Pairing &pairing, int k) {
  return pairing.partner_of_cu(k) >= 0;
}

PhaseVector random_phases(int dim, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  RVector ang(dim);
  for (int i = 0; i < dim; ++i) ang(i) = u(rng);
  return PhaseVector::from_angles(ang);
}

} // namespace

double lagrangian_dual_f(double zeta, double gamma) {
  return std::log1p(zeta) - zeta + (1.0 + zeta) * gamma / (1.0 + gamma);
}

FpAuxiliaries update_zeta(const SinrReport &report) {
  FpAuxiliaries aux;
  aux.zeta_d = report.gamma_d2d;
  aux.zeta_c = report.gamma_cu;
  return aux;
}

void update_xi(FpAuxiliaries &aux, const AggregatedCascades &agg,
               const PhaseVector &phi, const Pairing &pairing,
               const NoiseLevels &noise) {
  const LinkPowers lp = link_powers(agg, phi.values(), pairing, noise);
  const RVector zd = aux.zeta_tilde_d();
  const RVector zc = aux.zeta_tilde_c();
  aux.xi_d.resize(lp.s_d.size());
  aux.xi_c.resize(lp.s_c.size());
  for (Eigen::Index j = 0; j < lp.s_d.size(); ++j)
    aux.xi_d(j) = std::sqrt(zd(j)) * lp.s_d(j) / lp.den_d(j);
  for (Eigen::Index k = 0; k < lp.s_c.size(); ++k)
    aux.xi_c(k) = std::sqrt(zc(k)) * lp.s_c(k) / lp.den_c(k);
}

double fractional_objective(const FpAuxiliaries &aux,
                            const AggregatedCascades &agg,
                            const PhaseVector &phi, const Pairing &pairing,
                            const NoiseLevels &noise) {
  const LinkPowers lp = link_powers(agg, phi.values(), pairing, noise);
  const RVector zd = aux.zeta_tilde_d();
  const RVector zc = aux.zeta_tilde_c();
  double f = 0.0;
  for (Eigen::Index j = 0; j < lp.a_d.size(); ++j)
    f += zd(j) * lp.a_d(j) / lp.den_d(j);
  for (Eigen::Index k = 0; k < lp.a_c.size(); ++k)
    f += zc(k) * lp.a_c(k) / lp.den_c(k);
  return f;
}

double quadratic_transform_objective(const FpAuxiliaries &aux,
                                     const AggregatedCascades &agg,
                                     const PhaseVector &phi,
                                     const Pairing &pairing,
                                     const NoiseLevels &noise) {
  const LinkPowers lp = link_powers(agg, phi.values(), pairing, noise);
  const RVector zd = aux.zeta_tilde_d();
  const RVector zc = aux.zeta_tilde_c();
  double f = 0.0;
  for (Eigen::Index j = 0; j < lp.a_d.size(); ++j) {
    f += 2.0 * std::sqrt(zd(j)) * std::real(std::conj(aux.xi_d(j)) * lp.s_d(j)) -
         std::norm(aux.xi_d(j)) * lp.den_d(j);
  }
  for (Eigen::Index k = 0; k < lp.a_c.size(); ++k) {
    f += 2.0 * std::sqrt(zc(k)) * std::real(std::conj(aux.xi_c(k)) * lp.s_c(k)) -
         std::norm(aux.xi_c(k)) * lp.den_c(k);
  }
  return f;
}

double QcqpConstraint::value(const CVector &z) const {
  return std::real(z.dot(upsilon_c * z)) - 2.0 * std::real(v.dot(z)) - delta;
}

double QcqpProblem::objective(const CVector &phi) const {
  if (phi.size() == 0) return c_const;
  return -std::real(phi.dot(upsilon * phi)) + 2.0 * std::real(u.dot(phi)) +
         c_const;
}

double QcqpProblem::max_violation(const CVector &phi) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto &c : constraints) m = std::max(m, c.scale * c.value(phi));
  return constraints.empty() ? 0.0 : m;
}

QcqpProblem assemble_qcqp(const AggregatedCascades &agg,
                          const FpAuxiliaries &aux, const Pairing &pairing,
                          double qos_threshold, const NoiseLevels &noise) {
  const int J = static_cast<int>(agg.a.size());
  const int K = static_cast<int>(agg.alpha.size());
  const int NL = J > 0 ? static_cast<int>(agg.a[0].size()) : 0;
  const RVector zd = aux.zeta_tilde_d();
  const RVector zc = aux.zeta_tilde_c();

  QcqpProblem q;
  q.upsilon = CMatrix::Zero(NL, NL);
  q.u = CVector::Zero(NL);
  q.c_const = 0.0;

  for (int j = 0; j < J; ++j) {
    const double x2 = std::norm(aux.xi_d(j));
    const double sz = std::sqrt(zd(j));
    q.upsilon.noalias() += x2 * agg.a[j] * agg.a[j].adjoint();
    q.u += sz * aux.xi_d(j) * agg.a[j] - x2 * agg.g_tilde_d(j) * agg.a[j];
    double c_int = 0.0;
    for (int k = 0; k < K; ++k) {
      if (!pairing.rho(j, k)) continue;
      q.upsilon.noalias() += x2 * agg.b[k][j] * agg.b[k][j].adjoint();
      q.u -= x2 * agg.f_tilde_c(k, j) * agg.b[k][j];
      c_int += std::norm(agg.f_tilde_c(k, j));
    }
    q.c_const += 2.0 * sz * std::real(std::conj(aux.xi_d(j)) * agg.g_tilde_d(j)) -
                 x2 * (std::norm(agg.g_tilde_d(j)) + c_int + noise.dr(j));
  }
  for (int k = 0; k < K; ++k) {
    const double x2 = std::norm(aux.xi_c(k));
    const double sz = std::sqrt(zc(k));
    q.upsilon.noalias() += x2 * agg.alpha[k] * agg.alpha[k].adjoint();
    q.u += sz * aux.xi_c(k) * agg.alpha[k] - x2 * agg.g_tilde_c(k) * agg.alpha[k];
    double c_int = 0.0;
    for (int j = 0; j < J; ++j) {
      if (!pairing.rho(j, k)) continue;
      q.upsilon.noalias() += x2 * agg.beta[j] * agg.beta[j].adjoint();
      q.u -= x2 * agg.f_tilde_d(j) * agg.beta[j];
      c_int += std::norm(agg.f_tilde_d(j));
    }
    q.c_const += 2.0 * sz * std::real(std::conj(aux.xi_c(k)) * agg.g_tilde_c(k)) -
                 x2 * (std::norm(agg.g_tilde_c(k)) + c_int + noise.bs(k));
  }
  // Hermitian by construction; remove rounding asymmetry.
  q.upsilon = 0.5 * (q.upsilon + q.upsilon.adjoint()).eval();

  for (int k = 0; k < K; ++k) {
    if (!is_matched_cu(pairing, k)) continue;
    QcqpConstraint c;
    c.cu = k;
    c.upsilon_c = -agg.alpha[k] * agg.alpha[k].adjoint();
    c.v = agg.g_tilde_c(k) * agg.alpha[k];
    double interf = 0.0;
    for (int j = 0; j < J; ++j) {
      if (!pairing.rho(j, k)) continue;
      c.upsilon_c.noalias() += qos_threshold * agg.beta[j] * agg.beta[j].adjoint();
      c.v -= qos_threshold * agg.f_tilde_d(j) * agg.beta[j];
      interf += std::norm(agg.f_tilde_d(j));
    }
    c.upsilon_c = 0.5 * (c.upsilon_c + c.upsilon_c.adjoint()).eval();
    c.delta = std::norm(agg.g_tilde_c(k)) -
              qos_threshold * (noise.bs(k) + interf);
    c.scale = 1.0 / noise.bs(k);
    q.constraints.push_back(std::move(c));
  }
  return q;
}

double augmented_objective(const QcqpProblem &qcqp, const AdmmState &state,
                           const CVector &phi) {
  double f = std::real(phi.dot(qcqp.upsilon * phi)) -
             2.0 * std::real(qcqp.u.dot(phi));
  for (size_t k = 0; k < state.z.size(); ++k)
    f += state.penalty * (state.z[k] - phi + state.r[k]).squaredNorm();
  return f;
}

CVector augmented_gradient(const QcqpProblem &qcqp, const AdmmState &state,
                           const CVector &phi) {
  const double K = static_cast<double>(state.z.size());
  CVector g = 2.0 * (qcqp.upsilon * phi + K * state.penalty * phi) - 2.0 * qcqp.u;
  for (size_t k = 0; k < state.z.size(); ++k)
    g -= 2.0 * state.penalty * (state.z[k] + state.r[k]);
  return g;
}

CVector tangent_project(const CVector &grad, const CVector &phi) {
  const RVector re = (grad.array() * phi.array().conjugate()).real();
  return grad - (re.cast<Complex>().array() * phi.array()).matrix();
}

PhaseVector rgd_minimize(const QcqpProblem &qcqp, const AdmmState &state,
                         const RgdConfig &cfg) {
  CVector phi = state.phi.values();
  if (phi.size() == 0) return state.phi;
  double f = augmented_objective(qcqp, state, phi);
  for (int it = 0; it < cfg.max_iter; ++it) {
    const CVector grad = augmented_gradient(qcqp, state, phi);
    if (!grad.allFinite()) throw NumericalError("non-finite RGD gradient");
    const CVector rg = tangent_project(grad, phi);
    const double g2 = rg.squaredNorm();
    if (g2 <= cfg.grad_tol * cfg.grad_tol) break;
    double alpha = cfg.initial_step;
    bool moved = false;
    for (int b = 0; b < cfg.max_backtracks; ++b) {
      CVector cand = phi - alpha * rg;
      cand = cand.array() / cand.array().abs().cast<Complex>();
      const double fc = augmented_objective(qcqp, state, cand);
      if (fc <= f - cfg.armijo_c * alpha * g2) {
        phi = std::move(cand);
        f = fc;
        moved = true;
        break;
      }
      alpha *= cfg.backtrack;
    }
    if (!moved) break;
  }
  PhaseVector out(std::move(phi));
  out.retract();
  return out;
}

Eigenbasis Eigenbasis::of(const CMatrix &hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

CVector BisectionProblem::z_rot(double mu) const {
  CVector z(r_rot.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    z(i) = (r_rot(i) + mu * v_rot(i)) / (1.0 + mu * eigenvalues(i));
  return z;
}

double BisectionProblem::g(double mu) const {
  double s = -delta;
  for (Eigen::Index i = 0; i < r_rot.size(); ++i) {
    const Complex zi = (r_rot(i) + mu * v_rot(i)) / (1.0 + mu * eigenvalues(i));
    s += eigenvalues(i) * std::norm(zi) - 2.0 * std::real(std::conj(v_rot(i)) * zi);
  }
  return s;
}

namespace {

BisectionProblem rotate(const QcqpConstraint &con, const Eigenbasis &eig,
                        const CVector &r_tilde) {
  BisectionProblem p;
  p.eigenvalues = eig.values * con.scale;
  p.r_rot = eig.vectors.adjoint() * r_tilde;
  p.v_rot = eig.vectors.adjoint() * (con.v * con.scale);
  p.delta = con.delta * con.scale;
  return p;
}

// Searches [0, first pole) outward from zero for a sign change of g. On
// failure mu_lo = mu_hi = last multiplier probed.
bool bracket(BisectionProblem &p) {
  p.mu_lo = p.mu_hi = 0.0;
  if (!(p.g(0.0) > 0.0)) return true;
  const double e_min = p.eigenvalues(0);
  double lo = 0.0;
  auto probe = [&](double mu) {
    if (p.g(mu) < 0.0) {
      p.mu_lo = lo;
      p.mu_hi = mu;
      return true;
    }
    lo = mu;
    return false;
  };
  if (e_min < 0.0) {
    // Approach the first pole geometrically; I + mu Uc stays definite.
    const double pole = -1.0 / e_min;
    for (int n = 1; n <= 60; ++n)
      if (probe(pole * (1.0 - std::ldexp(1.0, -n)))) return true;
  } else {
    double mu = 1.0 / std::max(p.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
    for (int n = 0; n < 200; ++n, mu *= 4.0)
      if (probe(mu)) return true;
  }
  p.mu_lo = p.mu_hi = lo;
  return false;
}

} // namespace

BisectionProblem make_bisection_problem(const QcqpConstraint &con,
                                        const Eigenbasis &eig,
                                        const CVector &r_tilde) {
  BisectionProblem p = rotate(con, eig, r_tilde);
  if (!bracket(p)) {
    throw BracketError("no sign change of the constraint multiplier function");
  }
  return p;
}

double bisection_solve(const BisectionProblem &problem, double tol) {
  double lo = problem.mu_lo;
  double hi = problem.mu_hi;
  if (!(problem.g(lo) >= 0.0) || !(problem.g(hi) <= 0.0)) {
    throw BracketError("bisection bracket does not straddle zero");
  }
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = problem.g(mid);
    if (std::abs(gm) <= tol) return mid;
    if (gm > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

ZUpdateResult z_update(const QcqpConstraint &con, const Eigenbasis &eig,
                       const CVector &r_tilde, double tol) {
  ZUpdateResult res;
  if (con.scale * con.value(r_tilde) <= 0.0) {
    res.z = r_tilde;
    return res;
  }
  res.active = true;
  BisectionProblem bp = rotate(con, eig, r_tilde);
  if (bracket(bp)) {
    res.mu = bisection_solve(bp, tol);
  } else {
    // Closest approach to the constraint set among the probed multipliers.
    res.fallback = true;
    res.mu = bp.mu_lo;
  }
  res.z = eig.vectors * bp.z_rot(res.mu);
  return res;
}

ZUpdateResult z_update(const QcqpConstraint &con, const CVector &r_tilde,
                       double tol) {
  return z_update(con, Eigenbasis::of(con.upsilon_c), r_tilde, tol);
}

namespace {

struct Normalized {
  QcqpProblem q;
  double obj_scale = 1.0;
};

// Objective to unit scale, constraints to SINR units.
Normalized normalize(const QcqpProblem &in) {
  Normalized n;
  double s = in.upsilon.cwiseAbs().rowwise().sum().maxCoeff();
  if (in.u.size() > 0) s = std::max(s, in.u.cwiseAbs().maxCoeff());
  if (!(s > 0.0) || !std::isfinite(s)) s = 1.0;
  n.obj_scale = s;
  n.q.upsilon = in.upsilon / s;
  n.q.u = in.u / s;
  n.q.c_const = in.c_const / s;
  for (const auto &c : in.constraints) {
    QcqpConstraint cn = c;
    cn.upsilon_c = c.upsilon_c * c.scale;
    cn.v = c.v * c.scale;
    cn.delta = c.delta * c.scale;
    cn.scale = 1.0;
    n.q.constraints.push_back(std::move(cn));
  }
  return n;
}

// Near-feasible iterates compete on objective; otherwise on violation.
bool better(double obj, double viol, double best_obj, double best_viol,
            double feas_tol) {
  const bool f = viol <= feas_tol;
  const bool bf = best_viol <= feas_tol;
  if (f != bf) return f;
  if (f) return obj > best_obj;
  return viol < best_viol;
}

constexpr double kAdmmFeasTol = 1e-4;

AdmmResult admm_single(const Normalized &nq, const std::vector<Eigenbasis> &eig,
                       const PhaseVector &init, const AdmmConfig &cfg) {
  const QcqpProblem &q = nq.q;
  const int K = static_cast<int>(q.constraints.size());
  const int dim = q.dim();
  AdmmState st;
  st.phi = init;
  st.penalty = cfg.penalty;
  st.z.assign(K, init.values());
  st.r.assign(K, CVector::Zero(dim));

  AdmmResult res;
  res.phi = init;
  res.objective = q.objective(init.values());
  res.max_violation = q.max_violation(init.values());

  const int workers = dim >= cfg.parallel_min_dim ? default_workers() : 1;
  std::vector<ZUpdateResult> zr(K);
  for (int it = 0; it < cfg.max_iter; ++it) {
    const CVector prev = st.phi.values();
    st.phi = rgd_minimize(q, st, cfg.rgd);
    const CVector &phi = st.phi.values();

    parallel_for(K, workers, [&](int k) {
      zr[k] = z_update(q.constraints[k], eig[k], phi - st.r[k], cfg.bisection_tol);
    });
    AdmmIteration rec;
    double primal = 0.0;
    for (int k = 0; k < K; ++k) {
      st.z[k] = zr[k].z;
      st.r[k] += st.z[k] - phi;
      primal = std::max(primal, (st.z[k] - phi).norm());
      rec.fallbacks += zr[k].fallback ? 1 : 0;
    }
    const double change = (phi - prev).norm();
    rec.primal_residual = primal;
    rec.dual_residual = st.penalty * change;
    rec.objective = q.objective(phi) * nq.obj_scale;
    rec.max_violation = q.max_violation(phi);
    res.trace.push_back(rec);
    res.fallbacks += rec.fallbacks;
    st.iterations = it + 1;
    st.primal_residual = primal;
    st.dual_residual = rec.dual_residual;

    const double obj = q.objective(phi);
    if (better(obj, rec.max_violation, res.objective, res.max_violation,
               kAdmmFeasTol)) {
      res.phi = st.phi;
      res.objective = obj;
      res.max_violation = rec.max_violation;
    }
    const double scale = std::sqrt(static_cast<double>(std::max(dim, 1)));
    if (primal < cfg.tol * scale && change < cfg.tol * scale) {
      res.converged = true;
      break;
    }
    if (cfg.residual_balancing && K > 0) {
      if (primal > 10.0 * rec.dual_residual) {
        st.penalty *= 2.0;
        for (auto &r : st.r) r /= 2.0;
      } else if (rec.dual_residual > 10.0 * primal) {
        st.penalty /= 2.0;
        for (auto &r : st.r) r *= 2.0;
      }
    }
  }
  res.iterations = st.iterations;
  res.objective *= nq.obj_scale;
  return res;
}

} // namespace

AdmmResult admm_solve(const QcqpProblem &qcqp, const PhaseVector &init,
                      const AdmmConfig &cfg) {
  if (init.size() != qcqp.dim()) throw ConfigError("admm init dimension");
  if (!init.on_manifold(1e-9)) throw ConfigError("admm init off manifold");
  if (!(cfg.penalty > 0.0)) throw ConfigError("admm penalty must be positive");
  if (qcqp.dim() == 0) {
    AdmmResult r;
    r.phi = init;
    r.objective = qcqp.c_const;
    r.converged = true;
    return r;
  }
  const Normalized nq = normalize(qcqp);
  std::vector<Eigenbasis> eig;
  for (const auto &c : nq.q.constraints) eig.push_back(Eigenbasis::of(c.upsilon_c));

  AdmmResult best = admm_single(nq, eig, init, cfg);
  auto rng = std::mt19937_64(cfg.seed);
  for (int r = 0; r < cfg.restarts; ++r) {
    AdmmResult cand = admm_single(nq, eig, random_phases(qcqp.dim(), rng), cfg);
    if (better(cand.objective, cand.max_violation, best.objective,
               best.max_violation, kAdmmFeasTol)) {
      cand.trace.insert(cand.trace.begin(), best.trace.begin(), best.trace.end());
      best = std::move(cand);
    }
  }
  best.objective = qcqp.objective(best.phi.values());
  best.max_violation = qcqp.max_violation(best.phi.values());
  best.infeasible_flag = best.max_violation > kAdmmFeasTol;
  return best;
}

nlohmann::json admm_result_json(const AdmmResult &result) {
  nlohmann::json j;
  j["objective"] = result.objective;
  j["max_violation"] = result.max_violation;
  j["converged"] = result.converged;
  j["infeasible"] = result.infeasible_flag;
  j["iterations"] = result.iterations;
  j["fallbacks"] = result.fallbacks;
  nlohmann::json tr = nlohmann::json::array();
  for (const auto &it : result.trace) {
    tr.push_back({{"objective", it.objective},
                  {"primal_residual", it.primal_residual},
                  {"dual_residual", it.dual_residual},
                  {"max_violation", it.max_violation},
                  {"fallbacks", it.fallbacks}});
  }
  j["trace"] = std::move(tr);
  return j;
}

FpResult fp_outer_loop(const CascadedChannels &channels, const Pairing &pairing,
                       const PowerAllocation &powers, const BeamformerSet &beams,
                       const PhaseVector &phi_init, double qos_threshold,
                       const NoiseLevels &noise, const FpConfig &cfg) {
  const AggregatedCascades agg =
      aggregate_cascades(channels, pairing, powers, beams);
  FpResult out;
  out.phi = phi_init;

  auto qos_margin = [&](const SinrReport &rep) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < pairing.num_cu(); ++k) {
      if (!is_matched_cu(pairing, k)) continue;
      m = std::min(m, rep.gamma_cu(k) - qos_threshold * (1.0 - cfg.qos_slack));
    }
    return m;
  };

  SinrReport rep = sinr_from_cascades(agg, phi_init, pairing, noise);
  out.sum_rate = rep.sum_rate;
  double best_margin = qos_margin(rep);
  if (phi_init.size() == 0) return out;

  PhaseVector phi = phi_init;
  FpAuxiliaries prev;
  bool have_prev = false;
  double prev_rate = rep.sum_rate;
  for (int it = 0; it < cfg.max_iter; ++it) {
    FpIteration rec;
    FpAuxiliaries aux = update_zeta(rep);
    // Dual-transform objective before/after the zeta update at fixed phi.
    auto p5 = [&](const FpAuxiliaries &a) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < rep.gamma_d2d.size(); ++j)
        s += lagrangian_dual_f(a.zeta_d(j), rep.gamma_d2d(j));
      for (Eigen::Index k = 0; k < rep.gamma_cu.size(); ++k)
        s += lagrangian_dual_f(a.zeta_c(k), rep.gamma_cu(k));
      return s;
    };
    rec.surrogate_before = have_prev ? p5(prev) : p5(aux);
    update_xi(aux, agg, phi, pairing, noise);
    rec.surrogate_after = p5(aux);

    const QcqpProblem q = assemble_qcqp(agg, aux, pairing, qos_threshold, noise);
    AdmmConfig acfg = cfg.admm;
    acfg.seed = cfg.admm.seed + static_cast<std::uint64_t>(it);
    const AdmmResult ar = admm_solve(q, phi, acfg);
    phi = ar.phi;
    rec.qcqp_objective = ar.objective;

    rep = sinr_from_cascades(agg, phi, pairing, noise);
    rec.sum_rate = rep.sum_rate;
    rec.min_qos_margin = qos_margin(rep);
    out.trace.push_back(rec);
    out.iterations = it + 1;

    const bool feasible = rec.min_qos_margin >= 0.0;
    const bool best_feasible = best_margin >= 0.0;
    if ((feasible && (!best_feasible || rep.sum_rate > out.sum_rate)) ||
        (!feasible && !best_feasible && rec.min_qos_margin > best_margin)) {
      out.phi = phi;
      out.sum_rate = rep.sum_rate;
      best_margin = rec.min_qos_margin;
    }
    prev = aux;
    have_prev = true;
    if (std::abs(rep.sum_rate - prev_rate) <=
        cfg.rel_tol * std::max(std::abs(prev_rate), 1e-12))
      break;
    prev_rate = rep.sum_rate;
  }
  out.infeasible_flag = best_margin < 0.0;
  return out;
}

} // namespace risd2d
