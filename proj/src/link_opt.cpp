#include "risd2d/link_opt.hpp"

#include <algorithm>
#include <limits>

namespace risd2d {

LinkParams LinkParams::from(const ScenarioConfig &cfg) {
  return {cfg.p_max_cu, cfg.p_max_d2d, cfg.noise_dr, cfg.noise_bs,
          cfg.qos_threshold};
}

const char *to_string(Candidate c) {
  switch (c) {
  case Candidate::kO1:
    return "O1";
  case Candidate::kO2:
    return "O2";
  case Candidate::kO3:
    return "O3";
  case Candidate::kO0:
    return "O0";
  default:
    return "none";
  }
}

double PowerRegion::required_pc(double p_d) const {
  if (no_bs_interference) return gamma_tilde_c;
  return gamma_tilde_c / (1.0 - lambda1 * p_d / (p_d + lambda2));
}

bool PowerRegion::contains(const PowerPoint &p, double tol) const {
  if (p.p_d < 0.0 || p.p_d > p_max_d2d * (1.0 + 1e-12)) return false;
  if (p.p_c < 0.0 || p.p_c > p_max_cu * (1.0 + 1e-12)) return false;
  return p.p_c >= required_pc(p.p_d) * (1.0 - tol);
}

CVector receive_beamformer(const CVector &h_cu_bs, const CVector &h_dt_bs,
                           double p_d, double noise) {
  if (!(noise > 0.0)) throw ConfigError("receive noise must be positive");
  if (h_cu_bs.size() != h_dt_bs.size()) {
    throw ConfigError("beamformer channel dimensions differ");
  }
  const double hn = h_cu_bs.norm();
  if (hn == 0.0) throw DegenerateChannelError("CU-BS channel is zero");
  // Rank-one inverse: (p d d^H + s I)^{-1} h = (h - p d (d^H h)/(s + p|d|^2))/s.
  // The 1/s factor drops out under normalization.
  CVector w = h_cu_bs;
  if (p_d > 0.0) {
    const Complex dh = h_dt_bs.dot(h_cu_bs);
    w -= (p_d / (noise + p_d * h_dt_bs.squaredNorm())) * dh * h_dt_bs;
  }
  const double n = w.norm();
  if (n == 0.0) throw DegenerateChannelError("beamformer collapsed to zero");
  return w / n;
}

CVector robust_receive_beamformer(const CVector &h_cu_bs_est,
                                  const CVector &h_dt_bs_est, double p_d,
                                  double e2k, double noise_bs) {
  return receive_beamformer(h_cu_bs_est, h_dt_bs_est, p_d, e2k + noise_bs);
}

PowerRegion power_region(const CVector &h_cu_bs, const CVector &h_dt_bs,
                         const LinkParams &params) {
  if (!(params.noise_bs > 0.0)) throw ConfigError("noise must be positive");
  PowerRegion r;
  r.p_max_cu = params.p_max_cu;
  r.p_max_d2d = params.p_max_d2d;

  const double hc2 = h_cu_bs.squaredNorm();
  const double hd2 = h_dt_bs.squaredNorm();
  if (hc2 == 0.0) {
    r.gamma_tilde_c = std::numeric_limits<double>::infinity();
    r.feasible = params.qos_threshold == 0.0;
  } else {
    r.gamma_tilde_c = params.noise_bs * params.qos_threshold / hc2;
    r.feasible = r.gamma_tilde_c <= params.p_max_cu;
  }

  if (hd2 == 0.0) {
    r.no_bs_interference = true;
    r.lambda1 = 0.0;
    r.i_c = r.gamma_tilde_c;
  } else {
    const double c = hc2 > 0.0 ? std::norm(h_cu_bs.dot(h_dt_bs)) / (hc2 * hd2)
                               : 0.0;
    r.lambda1 = std::clamp(c, 0.0, 1.0);
    r.lambda2 = params.noise_bs / hd2;
    const double pd = params.p_max_d2d;
    r.i_c = r.gamma_tilde_c * (pd + r.lambda2) /
            ((1.0 - r.lambda1) * pd + r.lambda2);
  }

  const double pcm = params.p_max_cu;
  r.o2 = {params.p_max_d2d, r.i_c};
  r.o3 = {params.p_max_d2d, pcm};
  if (r.feasible && pcm < r.i_c && !r.no_bs_interference) {
    r.has_o1 = true;
    r.o1 = {r.lambda2 * (r.gamma_tilde_c - pcm) /
                ((1.0 - r.lambda1) * pcm - r.gamma_tilde_c),
            pcm};
  }
  return r;
}

AppendixAParams appendix_a_params(Complex h_d2d, Complex h_cu_dr,
                                  const CVector &h_cu_bs, double noise_bs) {
  return {std::norm(h_cu_dr), h_cu_bs.squaredNorm() / noise_bs,
          std::norm(h_d2d)};
}

double appendix_a_objective(double p_c, double p_d,
                            const AppendixAParams &params,
                            const PowerRegion &region, double noise_d) {
  double cu_factor = 1.0;
  if (!region.no_bs_interference) {
    cu_factor = (region.lambda2 + (1.0 - region.lambda1) * p_d) /
                (region.lambda2 + p_d);
  }
  const double g_c = params.nu1 * p_c * cu_factor;
  const double g_d = params.nu2 * p_d / (params.nu0 * p_c + noise_d);
  return std::log1p(g_c) + std::log1p(g_d);
}

PowerChoice optimal_power_pair(const PowerRegion &region,
                               const AppendixAParams &params, double noise_d) {
  if (!region.feasible) throw ConfigError("power region is empty");
  auto rate = [&](const PowerPoint &p) {
    return appendix_a_objective(p.p_c, p.p_d, params, region, noise_d);
  };
  PowerChoice best{region.o3, Candidate::kO3};
  if (region.has_o1) {
    best = {region.o1, Candidate::kO1};
  } else if (rate(region.o2) > rate(region.o3)) {
    best = {region.o2, Candidate::kO2};
  }
  // The top edge also ends at the silent-DT corner; a weak D2D link can
  // make it the maximizer.
  const PowerPoint o0{0.0, region.p_max_cu};
  if (rate(o0) > rate(best.point)) best = {o0, Candidate::kO0};
  return best;
}

double cu_only_rate(const CVector &h_cu_bs, const LinkParams &params) {
  return std::log1p(params.p_max_cu * h_cu_bs.squaredNorm() / params.noise_bs);
}

PairSolution solve_pair(Complex h_d2d, Complex h_cu_dr, const CVector &h_cu_bs,
                        const CVector &h_dt_bs, const LinkParams &params,
                        PowerMode mode) {
  const PowerRegion region = power_region(h_cu_bs, h_dt_bs, params);
  PairSolution s;
  PowerChoice choice;
  bool ok = region.feasible;
  if (ok && mode == PowerMode::kOptimal) {
    choice = optimal_power_pair(region,
                                appendix_a_params(h_d2d, h_cu_dr, h_cu_bs,
                                                  params.noise_bs),
                                params.noise_dr);
  } else if (ok) {
    choice = {region.o3, Candidate::kO3};
    ok = region.o3.p_c >= region.i_c;
  }

  if (!ok) {
    s.feasible = false;
    s.p_c = params.p_max_cu;
    s.p_d = 0.0;
    s.w = h_cu_bs / h_cu_bs.norm();
    s.rate_cu = cu_only_rate(h_cu_bs, params);
    s.rate_sum = s.rate_cu;
    return s;
  }

  s.feasible = true;
  s.which = choice.which;
  s.p_d = choice.point.p_d;
  s.p_c = choice.point.p_c;
  s.w = receive_beamformer(h_cu_bs, h_dt_bs, s.p_d, params.noise_bs);
  const double sig_c = s.p_c * std::norm(s.w.dot(h_cu_bs));
  const double int_c = s.p_d * std::norm(s.w.dot(h_dt_bs));
  s.rate_cu = std::log1p(sig_c / (int_c + params.noise_bs));
  s.rate_d2d = std::log1p(s.p_d * std::norm(h_d2d) /
                          (s.p_c * std::norm(h_cu_dr) + params.noise_dr));
  s.rate_sum = s.rate_cu + s.rate_d2d;
  return s;
}

} // namespace risd2d
