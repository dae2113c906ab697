#pragma once
// Realistic optimizer inputs drawn from the scenario generator.

#include "risd2d/bcd_driver.hpp"
#include "risd2d/channel_gen.hpp"

namespace fixture {

using namespace risd2d;

struct FpInstance {
  ScenarioConfig cfg;
  CascadedChannels ch;
  SolutionState sol; // link step at phi
  PhaseVector phi;
  AggregatedCascades agg;
  FpAuxiliaries aux;
  QcqpProblem qcqp;
};

inline ScenarioConfig small_scenario(int K, int J, int L, int N, int M = 4) {
  ScenarioConfig c;
  c.num_cu = K;
  c.num_d2d = J;
  c.num_ris = L;
  c.elements_per_ris = N;
  c.bs_antennas = M;
  const std::vector<Point2> all = {{0, 500}, {500, 0}, {0, -500}, {-500, 0}};
  c.ris_positions.assign(all.begin(), all.begin() + L);
  return c;
}

/// Step-1 solution at a random phase vector, then auxiliaries and QCQP
/// at that point.
inline FpInstance fp_instance(std::uint64_t seed, ScenarioConfig cfg) {
  FpInstance in;
  cfg.rng_seed = seed;
  in.cfg = cfg;
  in.ch = cascade(generate_channels(generate_geometry(cfg), FadingConfig{}, seed));
  auto rng = make_stream(seed, {99});
  std::uniform_real_distribution<double> u(0.0, 6.283185307179586);
  RVector ang(cfg.phase_dim());
  for (Eigen::Index i = 0; i < ang.size(); ++i) ang(i) = u(rng);
  in.phi = PhaseVector::from_angles(ang);
  in.sol = link_step(in.ch, in.phi, cfg, PowerMode::kOptimal);
  in.agg = aggregate_cascades(in.ch, in.sol.pairing, in.sol.powers, in.sol.beams);
  in.aux = update_zeta(in.sol.report);
  update_xi(in.aux, in.agg, in.phi, in.sol.pairing, in.sol.noise);
  in.qcqp = assemble_qcqp(in.agg, in.aux, in.sol.pairing, cfg.qos_threshold,
                          in.sol.noise);
  return in;
}

} // namespace fixture
