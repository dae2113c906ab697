#pragma once

#include "risd2d/channel_gen.hpp"
#include "risd2d/link_opt.hpp"
#include "risd2d/pairing.hpp"
#include "risd2d/passive_bf.hpp"

#include <optional>

namespace risd2d {

struct BcdConfig {
  int max_outer_iter = 30;
  double rel_tol = 1e-4;
  /// A candidate lower than the incumbent by more than this counts as a
  /// decrease event.
  double decrease_slack = 1e-6;
  FpConfig fp;
  bool robust = false;
  std::optional<CsiErrorModel> csi; // used when robust
  PowerMode power_mode = PowerMode::kOptimal;
  bool optimize_phase = true;
  std::optional<PhaseVector> phi_init; // all ones when empty

  void validate() const;
};

struct SolutionState {
  Pairing pairing;
  PowerAllocation powers;
  BeamformerSet beams;
  PhaseVector phi;
  SinrReport report;
  NoiseLevels noise;          // noise levels the report was computed with
  bool infeasible = false;    // some D2D pair left silent or QoS flag raised
  std::vector<int> silent_d2d;
};

struct BcdTrace {
  std::vector<double> sum_rate;       // accepted, one per outer iteration + initial
  std::vector<double> candidate_rate; // Step-1 rate after each Step 2
  std::vector<Pairing> pairings;
  std::vector<double> min_qos_residual;
  std::vector<double> step1_seconds;
  std::vector<double> step2_seconds;
  int decrease_events = 0;
  double max_decrease = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct BcdOutput {
  SolutionState solution;
  BcdTrace trace;
};

/// Per-link expected CSI-error powers and the resulting noise floors.
struct RobustEffectiveNoise {
  RVector e_delta1;       // [j]
  RVector sigma1_sq;      // [j]
  RVector e2k;            // [k]
  RVector sigma2_sq;      // [k]
  RVector delta_tilde;    // [k], zero for unmatched CUs

  NoiseLevels levels() const { return {sigma1_sq, sigma2_sq}; }
};

RobustEffectiveNoise compute_robust_noise(const CascadedChannels &estimates,
                                          const CsiErrorModel &csi,
                                          const Pairing &pairing,
                                          const PowerAllocation &powers,
                                          const BeamformerSet &beams,
                                          const PhaseVector &phi,
                                          const ScenarioConfig &cfg);

/// Step 1: per-pair closed forms at fixed phi, then matching. A nonzero CSI
/// model raises the noise floors by the expected error power at maximum
/// transmit powers.
SolutionState link_step(const CascadedChannels &channels, const PhaseVector &phi,
                        const ScenarioConfig &cfg, PowerMode mode,
                        const CsiErrorModel &csi = {});

BcdOutput bcd_solve(const CascadedChannels &channels, const ScenarioConfig &cfg,
                    const BcdConfig &bcd);
BcdOutput bcd_solve(const ChannelSet &channels, const ScenarioConfig &cfg,
                    const BcdConfig &bcd);

/// Lower-bound pipeline on estimated channels.
BcdOutput robust_bcd_solve(const CascadedChannels &estimates,
                           const CsiErrorModel &csi, const ScenarioConfig &cfg,
                           BcdConfig bcd);

} // namespace risd2d
