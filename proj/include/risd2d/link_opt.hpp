#pragma once

#include "risd2d/core_model.hpp"

namespace risd2d {

/// Power limits, noise and QoS threshold seen by one D2D-CU pair.
struct LinkParams {
  double p_max_cu = 0.0;
  double p_max_d2d = 0.0;
  double noise_dr = 0.0;
  double noise_bs = 0.0;
  double qos_threshold = 0.0;

  static LinkParams from(const ScenarioConfig &cfg);
};

/// (P^D, P^C) operating point.
struct PowerPoint {
  double p_d = 0.0;
  double p_c = 0.0;
};

/// O0 is the corner (0, P_C^max) where the DT stays silent.
enum class Candidate { kNone, kO0, kO1, kO2, kO3 };

const char *to_string(Candidate c);

/// Feasible region of the pair in the power plane, bounded below by the CU
/// QoS curve P^C >= gamma_tilde / (1 - lambda1 P^D / (P^D + lambda2)).
struct PowerRegion {
  double gamma_tilde_c = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0; // meaningless when no_bs_interference
  double i_c = 0.0;
  bool no_bs_interference = false; // DT invisible at the BS: lambda2 = +inf
  bool feasible = false;
  double p_max_cu = 0.0;
  double p_max_d2d = 0.0;
  PowerPoint o1, o2, o3;
  bool has_o1 = false;

  /// QoS curve value at p_d.
  double required_pc(double p_d) const;
  /// Box and QoS membership, with slack tol on the QoS side.
  bool contains(const PowerPoint &p, double tol = 0.0) const;
};

struct AppendixAParams {
  double nu0 = 0.0; // |h_kj^C|^2, CU -> DR interference gain
  double nu1 = 0.0; // ||h_k^C||^2 / sigma_b^2
  double nu2 = 0.0; // |h_j^D|^2
};

struct PowerChoice {
  PowerPoint point;
  Candidate which = Candidate::kNone;
};

struct PairSolution {
  double p_d = 0.0;
  double p_c = 0.0;
  CVector w;
  double rate_sum = 0.0;
  double rate_d2d = 0.0;
  double rate_cu = 0.0;
  bool feasible = false;
  Candidate which = Candidate::kNone;
};

/// Maximizer of the CU SINR over unit-norm w, (p_d d d^H + noise I)^{-1} h.
CVector receive_beamformer(const CVector &h_cu_bs, const CVector &h_dt_bs,
                           double p_d, double noise);

/// Same beamformer with the noise floor raised by the CSI-error power.
CVector robust_receive_beamformer(const CVector &h_cu_bs_est,
                                  const CVector &h_dt_bs_est, double p_d,
                                  double e2k, double noise_bs);

PowerRegion power_region(const CVector &h_cu_bs, const CVector &h_dt_bs,
                         const LinkParams &params);

AppendixAParams appendix_a_params(Complex h_d2d, Complex h_cu_dr,
                                  const CVector &h_cu_bs, double noise_bs);

/// Sum rate of the pair at (p_c, p_d) with the optimal beamformer, nats.
double appendix_a_objective(double p_c, double p_d,
                            const AppendixAParams &params,
                            const PowerRegion &region, double noise_d);

/// Closed-form optimum among the region's candidate points. Throws
/// ConfigError on an infeasible region.
PowerChoice optimal_power_pair(const PowerRegion &region,
                               const AppendixAParams &params, double noise_d);

/// Rate of CU k transmitting alone at full power with a matched filter.
double cu_only_rate(const CVector &h_cu_bs, const LinkParams &params);

enum class PowerMode { kOptimal, kFixedMax };

/// Full per-pair inner solve. An infeasible pair reports the CU-only
/// fallback (P_C^max, matched filter, zero D2D power).
PairSolution solve_pair(Complex h_d2d, Complex h_cu_dr, const CVector &h_cu_bs,
                        const CVector &h_dt_bs, const LinkParams &params,
                        PowerMode mode = PowerMode::kOptimal);

} // namespace risd2d
