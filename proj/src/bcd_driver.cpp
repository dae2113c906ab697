#include "risd2d/bcd_driver.hpp"

#include <chrono>
#include <limits>

namespace risd2d {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double min_matched_residual(const SolutionState &s, double threshold) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.pairing.num_cu(); ++k) {
    if (s.pairing.partner_of_cu(k) >= 0)
      m = std::min(m, s.report.gamma_cu(k) - threshold);
  }
  return std::isfinite(m) ? m : 0.0;
}

BcdOutput run_bcd(const CascadedChannels &ch, const ScenarioConfig &cfg,
                  const BcdConfig &bcd, const CsiErrorModel &csi) {
  cfg.validate();
  bcd.validate();
  ch.validate();
  const int NL = ch.phase_dim;
  PhaseVector phi = bcd.phi_init ? *bcd.phi_init : PhaseVector::ones(NL);
  if (phi.size() != NL) throw ConfigError("initial phase vector dimension");

  BcdOutput out;
  BcdTrace &tr = out.trace;
  auto t0 = Clock::now();
  SolutionState sol = link_step(ch, phi, cfg, bcd.power_mode, csi);
  tr.step1_seconds.push_back(seconds_since(t0));
  tr.step2_seconds.push_back(0.0);
  tr.sum_rate.push_back(sol.report.sum_rate);
  tr.pairings.push_back(sol.pairing);
  tr.min_qos_residual.push_back(min_matched_residual(sol, cfg.qos_threshold));

  if (NL == 0 || !bcd.optimize_phase) {
    tr.converged = true;
    out.solution = std::move(sol);
    return out;
  }

  for (int it = 0; it < bcd.max_outer_iter; ++it) {
    tr.iterations = it + 1;
    t0 = Clock::now();
    FpConfig fcfg = bcd.fp;
    fcfg.admm.seed = bcd.fp.admm.seed + 1000003ULL * static_cast<std::uint64_t>(it);
    const FpResult fp = fp_outer_loop(ch, sol.pairing, sol.powers, sol.beams,
                                      sol.phi, cfg.qos_threshold, sol.noise, fcfg);
    const double t_step2 = seconds_since(t0);
    t0 = Clock::now();
    SolutionState cand = link_step(ch, fp.phi, cfg, bcd.power_mode, csi);
    const double t_step1 = seconds_since(t0);

    const double prev = sol.report.sum_rate;
    const double next = cand.report.sum_rate;
    tr.candidate_rate.push_back(next);
    if (next < prev - bcd.decrease_slack) {
      ++tr.decrease_events;
      tr.max_decrease = std::max(tr.max_decrease, prev - next);
    }
    const bool accept = next >= prev;
    if (accept) sol = std::move(cand);
    tr.step1_seconds.push_back(t_step1);
    tr.step2_seconds.push_back(t_step2);
    tr.sum_rate.push_back(sol.report.sum_rate);
    tr.pairings.push_back(sol.pairing);
    tr.min_qos_residual.push_back(min_matched_residual(sol, cfg.qos_threshold));

    // A rejected candidate would be regenerated identically: stationary.
    if (!accept ||
        std::abs(next - prev) < bcd.rel_tol * std::max(std::abs(prev), 1e-12)) {
      tr.converged = true;
      break;
    }
  }
  out.solution = std::move(sol);
  return out;
}

} // namespace

void BcdConfig::validate() const {
  if (max_outer_iter < 1) throw ConfigError("max_outer_iter must be >= 1");
  if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be positive");
  if (robust && csi) csi->validate();
}

RobustEffectiveNoise compute_robust_noise(const CascadedChannels &est,
                                          const CsiErrorModel &csi,
                                          const Pairing &pairing,
                                          const PowerAllocation &powers,
                                          const BeamformerSet &beams,
                                          const PhaseVector &phi,
                                          const ScenarioConfig &cfg) {
  csi.validate();
  const int J = est.num_d2d, K = est.num_cu;
  // ||phi||^2 on the manifold.
  const double nl = static_cast<double>(est.phase_dim);
  RobustEffectiveNoise r;
  r.e_delta1 = RVector::Zero(J);
  r.e2k = RVector::Zero(K);
  r.delta_tilde = RVector::Zero(K);
  for (int j = 0; j < J; ++j) {
    double e = powers.p_d2d(j) * (csi.g_d2d + csi.q_d2d * nl);
    const int k = pairing.partner_of_d2d(j);
    if (k >= 0) e += powers.p_cu(k) * (csi.f_cu_dr + csi.q_cu_dr * nl);
    r.e_delta1(j) = e;
  }
  for (int k = 0; k < K; ++k) {
    double e = powers.p_cu(k) * (csi.g_cu_bs + csi.q_cu_bs * nl);
    const int j = pairing.partner_of_cu(k);
    if (j >= 0) e += powers.p_d2d(j) * (csi.f_dt_bs + csi.q_dt_bs * nl);
    r.e2k(k) = e;
  }
  r.sigma1_sq = r.e_delta1.array() + cfg.noise_dr;
  r.sigma2_sq = r.e2k.array() + cfg.noise_bs;

  if (phi.size() != est.phase_dim) throw ConfigError("phase dimension");
  const AggregatedCascades agg = aggregate_cascades(est, pairing, powers, beams);
  for (int k = 0; k < K; ++k) {
    const int j = pairing.partner_of_cu(k);
    if (j < 0) continue;
    r.delta_tilde(k) =
        std::norm(agg.g_tilde_c(k)) -
        cfg.qos_threshold * (r.sigma2_sq(k) + std::norm(agg.f_tilde_d(j)));
  }
  return r;
}

SolutionState link_step(const CascadedChannels &ch, const PhaseVector &phi,
                        const ScenarioConfig &cfg, PowerMode mode,
                        const CsiErrorModel &csi) {
  const int J = ch.num_d2d, K = ch.num_cu;
  const double nl = static_cast<double>(ch.phase_dim);
  const EffectiveChannels eff = compose_effective_channels(ch, phi);

  // Conservative floors at maximum powers keep QoS valid at any chosen power.
  LinkParams pair = LinkParams::from(cfg);
  pair.noise_dr += cfg.p_max_d2d * (csi.g_d2d + csi.q_d2d * nl) +
                   cfg.p_max_cu * (csi.f_cu_dr + csi.q_cu_dr * nl);
  pair.noise_bs += cfg.p_max_cu * (csi.g_cu_bs + csi.q_cu_bs * nl) +
                   cfg.p_max_d2d * (csi.f_dt_bs + csi.q_dt_bs * nl);
  LinkParams alone = LinkParams::from(cfg);
  alone.noise_bs += cfg.p_max_cu * (csi.g_cu_bs + csi.q_cu_bs * nl);

  std::vector<std::vector<PairSolution>> sols(J, std::vector<PairSolution>(K));
  RVector cu_only(K);
  for (int k = 0; k < K; ++k) cu_only(k) = cu_only_rate(eff.h_cu_bs[k], alone);
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k)
      sols[j][k] = solve_pair(eff.h_d2d(j), eff.h_cu_dr(k, j), eff.h_cu_bs[k],
                              eff.h_dt_bs[j], pair, mode);

  const WeightMatrix wm = build_weight_matrix(sols, cu_only);
  const Matching match = hungarian_match(wm);

  SolutionState s;
  s.phi = phi;
  s.pairing = match.to_pairing(K);
  s.powers.p_cu = RVector::Constant(K, cfg.p_max_cu);
  s.powers.p_d2d = RVector::Zero(J);
  s.beams.w.resize(K);
  for (int k = 0; k < K; ++k) {
    const double n = eff.h_cu_bs[k].norm();
    if (n == 0.0) throw DegenerateChannelError("CU-BS channel is zero");
    s.beams.w[k] = eff.h_cu_bs[k] / n;
  }
  for (int j = 0; j < J; ++j) {
    const int k = match.assignment[j];
    if (k < 0) {
      s.silent_d2d.push_back(j);
      continue;
    }
    s.powers.p_d2d(j) = sols[j][k].p_d;
    s.powers.p_cu(k) = sols[j][k].p_c;
    s.beams.w[k] = sols[j][k].w;
  }
  s.noise = csi.perfect()
                ? NoiseLevels::uniform(J, K, cfg.noise_dr, cfg.noise_bs)
                : compute_robust_noise(ch, csi, s.pairing, s.powers, s.beams,
                                       phi, cfg)
                      .levels();
  s.report = evaluate_sinr(ch, phi, s.pairing, s.powers, s.beams, s.noise);
  s.infeasible = !s.silent_d2d.empty() ||
                 !matched_qos_feasible(s.report, s.pairing, cfg.qos_threshold);
  return s;
}

BcdOutput bcd_solve(const CascadedChannels &channels, const ScenarioConfig &cfg,
                    const BcdConfig &bcd) {
  const CsiErrorModel csi =
      bcd.robust && bcd.csi ? *bcd.csi : CsiErrorModel{};
  return run_bcd(channels, cfg, bcd, csi);
}

BcdOutput bcd_solve(const ChannelSet &channels, const ScenarioConfig &cfg,
                    const BcdConfig &bcd) {
  return bcd_solve(cascade(channels), cfg, bcd);
}

BcdOutput robust_bcd_solve(const CascadedChannels &estimates,
                           const CsiErrorModel &csi, const ScenarioConfig &cfg,
                           BcdConfig bcd) {
  bcd.robust = true;
  bcd.csi = csi;
  return run_bcd(estimates, cfg, bcd, csi);
}

} // namespace risd2d
