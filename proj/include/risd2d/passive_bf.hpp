#pragma once

#include "risd2d/core_model.hpp"

#include <nlohmann/json_fwd.hpp>

#include <random>

namespace risd2d {

/// Lagrangian-dual and quadratic-transform auxiliaries.
struct FpAuxiliaries {
  RVector zeta_d; // [j]
  RVector zeta_c; // [k]
  CVector xi_d;   // [j]
  CVector xi_c;   // [k]

  RVector zeta_tilde_d() const { return zeta_d.array() + 1.0; }
  RVector zeta_tilde_c() const { return zeta_c.array() + 1.0; }
};

/// log(1+z) - z + (1+z) g / (1+g).
double lagrangian_dual_f(double zeta, double gamma);

/// zeta = gamma; xi left empty.
FpAuxiliaries update_zeta(const SinrReport &report);

/// Fills xi with the stationary point of the quadratic transform at phi.
void update_xi(FpAuxiliaries &aux, const AggregatedCascades &cascades,
               const PhaseVector &phi, const Pairing &pairing,
               const NoiseLevels &noise);

/// Sum of zeta_tilde * A / (A + B + noise) over all links.
double fractional_objective(const FpAuxiliaries &aux,
                            const AggregatedCascades &cascades,
                            const PhaseVector &phi, const Pairing &pairing,
                            const NoiseLevels &noise);

/// Quadratic-transform surrogate evaluated term by term.
double quadratic_transform_objective(const FpAuxiliaries &aux,
                                     const AggregatedCascades &cascades,
                                     const PhaseVector &phi,
                                     const Pairing &pairing,
                                     const NoiseLevels &noise);

/// One CU QoS constraint z^H Uc z - 2 Re(v^H z) <= delta.
struct QcqpConstraint {
  int cu = -1;
  CMatrix upsilon_c;
  CVector v;
  double delta = 0.0;
  /// Positive factor bringing the constraint to SINR units (1/sigma_b^2).
  double scale = 1.0;

  /// Left side minus delta; <= 0 is feasible. Unscaled.
  double value(const CVector &z) const;
};

/// max -phi^H U phi + 2 Re(u^H phi) + C over the unit-modulus set, subject
/// to the CU constraints.
struct QcqpProblem {
  CMatrix upsilon;
  CVector u;
  double c_const = 0.0;
  std::vector<QcqpConstraint> constraints;

  int dim() const { return static_cast<int>(u.size()); }
  double objective(const CVector &phi) const;
  /// Largest scaled constraint value (<= 0 means feasible).
  double max_violation(const CVector &phi) const;
};

/// Builds the QCQP from current auxiliaries. Constraints are emitted for
/// CUs that share their subchannel. noise.bs[k] enters delta_k, so inflated
/// noise levels yield the robust variant.
QcqpProblem assemble_qcqp(const AggregatedCascades &cascades,
                          const FpAuxiliaries &aux, const Pairing &pairing,
                          double qos_threshold, const NoiseLevels &noise);

struct RgdConfig {
  int max_iter = 30;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo_c = 1e-4;
  int max_backtracks = 40;
  double grad_tol = 1e-10;
};

struct AdmmConfig {
  double penalty = 1.0;
  int max_iter = 200;
  double tol = 1e-6;
  bool residual_balancing = false;
  int restarts = 0;
  std::uint64_t seed = 0;
  double bisection_tol = 1e-7;
  /// Dimension at and above which z-updates run on the worker pool.
  int parallel_min_dim = 64;
  RgdConfig rgd;
};

/// Scaled-form ADMM state on the consensus splitting.
struct AdmmState {
  PhaseVector phi;
  std::vector<CVector> z;
  std::vector<CVector> r;
  double penalty = 1.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// Augmented objective f(phi) + penalty * sum ||z_k - phi + r_k||^2 in the
/// minimization sign convention.
double augmented_objective(const QcqpProblem &qcqp, const AdmmState &state,
                           const CVector &phi);

/// Euclidean (Wirtinger) gradient of the augmented objective.
CVector augmented_gradient(const QcqpProblem &qcqp, const AdmmState &state,
                           const CVector &phi);

/// Tangent-space projection at phi on the product of unit circles.
CVector tangent_project(const CVector &grad, const CVector &phi);

/// Armijo-backtracked Riemannian gradient descent; never increases the
/// augmented objective.
PhaseVector rgd_minimize(const QcqpProblem &qcqp, const AdmmState &state,
                         const RgdConfig &cfg);

/// Constraint data rotated to the eigenbasis of Uc.
struct BisectionProblem {
  RVector eigenvalues; // ascending
  CVector r_rot;       // U^H r_tilde
  CVector v_rot;       // U^H v
  double delta = 0.0;
  double mu_lo = 0.0;
  double mu_hi = 0.0;

  /// Constraint value at z(mu) = (I + mu Uc)^{-1}(r_tilde + mu v).
  double g(double mu) const;
  CVector z_rot(double mu) const;
};

struct Eigenbasis {
  RVector values;
  CMatrix vectors;
  static Eigenbasis of(const CMatrix &hermitian);
};

/// Bracket [0, mu_hi) on which I + mu Uc stays positive definite and g
/// changes sign. Throws BracketError when no sign change exists.
BisectionProblem make_bisection_problem(const QcqpConstraint &con,
                                        const Eigenbasis &eig,
                                        const CVector &r_tilde);

double bisection_solve(const BisectionProblem &problem, double tol);

struct ZUpdateResult {
  CVector z;
  bool active = false;
  bool fallback = false;
  double mu = 0.0;
};

/// Projection of r_tilde onto one constraint set. Works in the scaled
/// units of the constraint.
ZUpdateResult z_update(const QcqpConstraint &con, const Eigenbasis &eig,
                       const CVector &r_tilde, double tol);
ZUpdateResult z_update(const QcqpConstraint &con, const CVector &r_tilde,
                       double tol);

struct AdmmIteration {
  double objective = 0.0;     // QCQP objective (maximization form)
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double max_violation = 0.0; // scaled
  int fallbacks = 0;
};

struct AdmmResult {
  PhaseVector phi;
  double objective = 0.0;
  double max_violation = 0.0;
  bool converged = false;
  bool infeasible_flag = false;
  int iterations = 0;
  int fallbacks = 0;
  std::vector<AdmmIteration> trace;
};

AdmmResult admm_solve(const QcqpProblem &qcqp, const PhaseVector &init,
                      const AdmmConfig &cfg);

nlohmann::json admm_result_json(const AdmmResult &result);

struct FpConfig {
  int max_iter = 20;
  double rel_tol = 1e-4;
  /// Relative SINR slack for a matched CU when picking the best iterate.
  double qos_slack = 1e-4;
  /// Inexact primal updates inside the outer loop: a few RGD steps per ADMM
  /// round reach the same optimum faster than 30.
  AdmmConfig admm = [] {
    AdmmConfig a;
    a.rgd.max_iter = 5;
    return a;
  }();
};

struct FpIteration {
  double sum_rate = 0.0;
  double surrogate_before = 0.0; // fractional objective before xi update
  double surrogate_after = 0.0;  // after xi update
  double qcqp_objective = 0.0;
  double min_qos_margin = 0.0;
};

struct FpResult {
  PhaseVector phi;
  double sum_rate = 0.0;
  int iterations = 0;
  bool infeasible_flag = false;
  std::vector<FpIteration> trace;
};

/// Alternates zeta/xi updates and the QCQP solve for fixed pairing, powers
/// and beamformers. Returns the best iterate by sum rate among those meeting
/// the matched-CU QoS.
FpResult fp_outer_loop(const CascadedChannels &channels, const Pairing &pairing,
                       const PowerAllocation &powers, const BeamformerSet &beams,
                       const PhaseVector &phi_init, double qos_threshold,
                       const NoiseLevels &noise, const FpConfig &cfg);

} // namespace risd2d
