#pragma once

#include "risd2d/types.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace risd2d {

/// Scenario parameters. Powers and noise in watts, distances in meters,
/// SINR thresholds linear.
struct ScenarioConfig {
  int num_cu = 3;            // K
  int num_d2d = 2;           // J
  int num_ris = 4;           // L
  int elements_per_ris = 10; // N
  int bs_antennas = 4;       // M
  double p_max_cu = 0.02;
  double p_max_d2d = 0.02;
  double noise_dr = dbm_to_watts(-115.0);
  double noise_bs = dbm_to_watts(-115.0);
  double qos_threshold = 0.5;
  double cell_radius = 500.0;
  std::vector<Point2> ris_positions = {
      {0.0, 500.0}, {500.0, 0.0}, {0.0, -500.0}, {-500.0, 0.0}};
  std::array<double, 2> cu_ring = {400.0, 500.0};
  std::array<double, 2> d2d_distance = {10.0, 30.0};
  std::uint64_t rng_seed = 1;

  // Optional pinned user positions; empty means drawn at random.
  std::vector<Point2> cu_positions;
  std::vector<Point2> dt_positions;

  int phase_dim() const { return num_ris * elements_per_ris; }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Raw per-link channels of one realization.
///
/// RIS-indexed members are laid out [l][user]. Multiplication conventions
/// follow the uplink model: the D2D direct gain seen by DR j through RIS l is
/// s_ris_dr[l][j]^H * Theta_l * s_dt_ris[l][j].
struct ChannelSet {
  int num_cu = 0;
  int num_d2d = 0;
  int num_ris = 0;
  int elements_per_ris = 0;
  int bs_antennas = 0;

  std::vector<CVector> g_cu_bs;  // [k], M
  CVector g_d2d;                 // [j]
  CMatrix f_cu_dr;               // (k, j)
  std::vector<CVector> f_dt_bs;  // [j], M

  std::vector<std::vector<CVector>> s_cu_ris; // [l][k], N
  std::vector<CMatrix> s_ris_bs;              // [l], M x N
  std::vector<std::vector<CVector>> s_dt_ris; // [l][j], N
  std::vector<std::vector<CVector>> s_ris_dr; // [l][j], N

  int phase_dim() const { return num_ris * elements_per_ris; }
  void validate() const;
};

/// Channels with every RIS path folded into a cascaded coefficient stacked
/// over all RISs (length N*L). This is the form the optimizer and the
/// imperfect-CSI model operate on.
struct CascadedChannels {
  int num_cu = 0;
  int num_d2d = 0;
  int bs_antennas = 0;
  int phase_dim = 0;

  std::vector<CVector> g_cu_bs; // [k], M
  CVector g_d2d;                // [j]
  CMatrix f_cu_dr;              // (k, j)
  std::vector<CVector> f_dt_bs; // [j], M

  std::vector<CVector> q_d2d;                // [j]: h_j = g_j + q^H phi
  std::vector<std::vector<CVector>> q_cu_dr; // [k][j]: h_kj = f_kj + q^H phi
  std::vector<CMatrix> q_cu_bs;              // [k]: h_k = g_k + Q phi
  std::vector<CMatrix> q_dt_bs;              // [j]: h_j = f_j + Q phi

  void validate() const;
};

CascadedChannels cascade(const ChannelSet &channels);

/// Elementwise a - b. Dimensions must agree.
CascadedChannels subtract(const CascadedChannels &a,
                          const CascadedChannels &b);

/// Stacked RIS configuration; entry l*N + n holds exp(j theta_ln).
class PhaseVector {
public:
  PhaseVector() = default;
  explicit PhaseVector(CVector values) : values_(std::move(values)) {}

  static PhaseVector ones(int dim);
  static PhaseVector from_angles(const RVector &angles);

  const CVector &values() const { return values_; }
  CVector &values() { return values_; }
  int size() const { return static_cast<int>(values_.size()); }

  bool on_manifold(double tol = 1e-12) const;
  /// Elementwise normalization back onto |phi_i| = 1.
  void retract();

private:
  CVector values_;
};

/// D2D-to-CU reuse assignment; partner(j) is the CU whose subchannel D2D
/// pair j reuses, or -1 when the pair is left silent.
class Pairing {
public:
  Pairing() = default;
  Pairing(int num_d2d, int num_cu);
  Pairing(int num_cu, std::vector<int> partner);

  int num_d2d() const { return static_cast<int>(partner_.size()); }
  int num_cu() const { return num_cu_; }

  int partner_of_d2d(int j) const { return partner_[j]; }
  /// D2D pair reusing CU k, or -1.
  int partner_of_cu(int k) const;
  bool rho(int j, int k) const { return partner_[j] == k; }

  void assign(int j, int k);
  bool complete() const;
  /// Injectivity and index bounds; throws ConfigError.
  void validate() const;

  Eigen::MatrixXi matrix() const;
  const std::vector<int> &partners() const { return partner_; }

  bool operator==(const Pairing &) const = default;

private:
  int num_cu_ = 0;
  std::vector<int> partner_;
};

struct PowerAllocation {
  RVector p_cu;  // [k]
  RVector p_d2d; // [j]; zero for silent pairs
};

struct BeamformerSet {
  std::vector<CVector> w; // [k], unit norm
};

/// Receiver noise levels per link. The imperfect-CSI pipeline inflates these
/// by the expected estimation-error power; otherwise they are uniform.
struct NoiseLevels {
  RVector dr; // [j]
  RVector bs; // [k]

  static NoiseLevels uniform(const ScenarioConfig &cfg);
  static NoiseLevels uniform(int num_d2d, int num_cu, double noise_dr,
                             double noise_bs);
};

struct EffectiveChannels {
  CVector h_d2d;               // [j]
  CMatrix h_cu_dr;             // (k, j)
  std::vector<CVector> h_cu_bs; // [k], M
  std::vector<CVector> h_dt_bs; // [j], M
};

/// Power- and beamformer-weighted cascades. beta/f_tilde_d for a D2D pair use
/// the receive beamformer of its partner CU and are zero for silent pairs.
struct AggregatedCascades {
  std::vector<CVector> a;                // [j]
  std::vector<std::vector<CVector>> b;   // [k][j]
  std::vector<CVector> alpha;            // [k]
  std::vector<CVector> beta;             // [j]
  CVector g_tilde_d;                     // [j]
  CMatrix f_tilde_c;                     // (k, j)
  CVector g_tilde_c;                     // [k]
  CVector f_tilde_d;                     // [j]
};

struct SinrReport {
  RVector gamma_d2d;
  RVector gamma_cu;
  RVector rate_d2d; // nats
  RVector rate_cu;  // nats
  double sum_rate = 0.0;
};

EffectiveChannels compose_effective_channels(const ChannelSet &channels,
                                             const PhaseVector &phi);
EffectiveChannels compose_effective_channels(const CascadedChannels &channels,
                                             const PhaseVector &phi);

AggregatedCascades aggregate_cascades(const CascadedChannels &channels,
                                      const Pairing &pairing,
                                      const PowerAllocation &powers,
                                      const BeamformerSet &beams);

/// SINRs from the raw uplink expressions.
SinrReport evaluate_sinr(const CascadedChannels &channels,
                         const PhaseVector &phi, const Pairing &pairing,
                         const PowerAllocation &powers,
                         const BeamformerSet &beams, const NoiseLevels &noise);
SinrReport evaluate_sinr(const ChannelSet &channels, const PhaseVector &phi,
                         const Pairing &pairing, const PowerAllocation &powers,
                         const BeamformerSet &beams, const NoiseLevels &noise);

/// SINRs rebuilt from the aggregated quadratic-form coefficients.
SinrReport sinr_from_cascades(const AggregatedCascades &cascades,
                              const PhaseVector &phi, const Pairing &pairing,
                              const NoiseLevels &noise);

/// Builds rates and sum from SINR vectors.
SinrReport make_report(RVector gamma_d2d, RVector gamma_cu);

/// gamma_k - threshold per CU.
RVector qos_residuals(const SinrReport &report, const ScenarioConfig &cfg);
RVector qos_residuals(const SinrReport &report, double threshold);

bool qos_feasible(const RVector &residuals, double tol = kQosTolerance);

/// QoS check restricted to CUs that share their subchannel with a D2D pair.
bool matched_qos_feasible(const SinrReport &report, const Pairing &pairing,
                          double threshold, double tol = kQosTolerance);

} // namespace risd2d
