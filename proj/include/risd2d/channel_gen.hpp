#pragma once

#include "risd2d/core_model.hpp"

#include <initializer_list>
#include <random>

namespace risd2d {

/// Multipath statistics of the three link classes. Taps are collapsed to a
/// single flat gain by coherent summation.
struct FadingConfig {
  int taps_direct = 16;    // BS-user links, Rayleigh
  int taps_user_user = 16; // user-user links, Rayleigh
  int taps_ris = 4;        // RIS-BS and RIS-user links, Rician
  double pathloss_exp_bs_user = 3.8;
  double pathloss_exp_ris = 2.2;
  double pathloss_exp_user_user = 4.0;
  double rician_factor_ris_db = 10.0;
  double reference_loss_db = 30.0; // at 1 m

  void validate() const;
};

/// Variances of the circularly-symmetric Gaussian CSI errors, per element.
struct CsiErrorModel {
  double g_cu_bs = 0.0;  // direct CU-BS
  double g_d2d = 0.0;    // direct DT-DR
  double f_cu_dr = 0.0;  // CU-DR interference
  double f_dt_bs = 0.0;  // DT-BS interference
  double q_d2d = 0.0;    // cascaded DT-RIS-DR
  double q_cu_dr = 0.0;  // cascaded CU-RIS-DR
  double q_cu_bs = 0.0;  // cascaded CU-RIS-BS
  double q_dt_bs = 0.0;  // cascaded DT-RIS-BS

  static CsiErrorModel uniform(double variance);
  CsiErrorModel scaled(double factor) const;
  bool perfect() const;
  void validate() const;
};

struct Geometry {
  Point2 bs;
  std::vector<Point2> cu;
  std::vector<Point2> dt;
  std::vector<Point2> dr;
  std::vector<Point2> ris;
  int bs_antennas = 0;
  int elements_per_ris = 0;
};

/// Independent random stream for a (seed, tag...) tuple.
std::mt19937_64 make_stream(std::uint64_t seed,
                            std::initializer_list<std::uint64_t> tags);

/// Linear power gain at distance d (clamped to >= 1 m).
double path_gain(double d, double exponent, const FadingConfig &fading);

/// Half-wavelength ULA response, entry m = exp(j pi m sin(angle)).
CVector ula_response(int size, double angle);

// Link-level draws. Each consumes the stream in an order independent of the
// array size, so a larger array extends a smaller one.
CVector draw_bs_user_link(std::mt19937_64 &rng, int bs_antennas, int taps,
                          double gain);
Complex draw_user_user_link(std::mt19937_64 &rng, int taps, double gain);
Complex draw_ris_element(std::mt19937_64 &rng, int taps, double gain,
                         double rician_k, double los_phase);
CVector draw_ris_bs_column(std::mt19937_64 &rng, int bs_antennas, int taps,
                           double gain, double rician_k, double los_phase,
                           double los_aoa);

Geometry generate_geometry(const ScenarioConfig &cfg);

ChannelSet generate_channels(const Geometry &geometry,
                             const FadingConfig &fading, std::uint64_t seed);

/// Imperfect-CSI draw: estimated = truth - error, both in cascaded form.
struct CsiRealization {
  CascadedChannels estimated;
  CascadedChannels error;
};

CsiRealization apply_csi_error(const CascadedChannels &truth,
                               const CsiErrorModel &model, std::uint64_t seed);
CsiRealization apply_csi_error(const ChannelSet &truth,
                               const CsiErrorModel &model, std::uint64_t seed);

} // namespace risd2d
