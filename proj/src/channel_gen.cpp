#include "risd2d/channel_gen.hpp"

#include <numbers>
#include <vector>

namespace risd2d {

namespace {

enum StreamTag : std::uint64_t {
  kTagCuPosition = 1,
  kTagD2dPosition,
  kTagCuBs,
  kTagD2d,
  kTagCuDr,
  kTagDtBs,
  kTagCuRis,
  kTagRisBs,
  kTagDtRis,
  kTagRisDr,
  kTagCsi,
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex cn(std::mt19937_64 &rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

double uniform(std::mt19937_64 &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double angle_of(const Point2 &from, const Point2 &to) {
  return std::atan2(to.y - from.y, to.x - from.x);
}

// Uniform point in an annulus, area-uniform.
Point2 uniform_in_ring(std::mt19937_64 &rng, double r_min, double r_max) {
  const double u = uniform(rng, 0.0, 1.0);
  const double r = std::sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min));
  const double t = uniform(rng, 0.0, kTwoPi);
  return {r * std::cos(t), r * std::sin(t)};
}

} // namespace

void FadingConfig::validate() const {
  if (taps_direct < 1 || taps_user_user < 1 || taps_ris < 1) {
    throw ConfigError("tap counts must be >= 1");
  }
  if (pathloss_exp_bs_user <= 0 || pathloss_exp_ris <= 0 ||
      pathloss_exp_user_user <= 0) {
    throw ConfigError("path-loss exponents must be positive");
  }
}

CsiErrorModel CsiErrorModel::uniform(double variance) {
  return {variance, variance, variance, variance,
          variance, variance, variance, variance};
}

CsiErrorModel CsiErrorModel::scaled(double factor) const {
  return {g_cu_bs * factor, g_d2d * factor,   f_cu_dr * factor,
          f_dt_bs * factor, q_d2d * factor,   q_cu_dr * factor,
          q_cu_bs * factor, q_dt_bs * factor};
}

bool CsiErrorModel::perfect() const {
  return g_cu_bs == 0 && g_d2d == 0 && f_cu_dr == 0 && f_dt_bs == 0 &&
         q_d2d == 0 && q_cu_dr == 0 && q_cu_bs == 0 && q_dt_bs == 0;
}

void CsiErrorModel::validate() const {
  for (double v : {g_cu_bs, g_d2d, f_cu_dr, f_dt_bs, q_d2d, q_cu_dr, q_cu_bs,
                   q_dt_bs}) {
    if (!(v >= 0.0)) throw ConfigError("CSI error variances must be >= 0");
  }
}

std::mt19937_64 make_stream(std::uint64_t seed,
                            std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (tags.size() + 1));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto t : tags) push(t);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

double path_gain(double d, double exponent, const FadingConfig &fading) {
  const double dist = std::max(d, 1.0);
  const double loss_db =
      fading.reference_loss_db + 10.0 * exponent * std::log10(dist);
  return std::pow(10.0, -loss_db / 10.0);
}

CVector ula_response(int size, double angle) {
  CVector a(size);
  const double s = std::sin(angle);
  for (int m = 0; m < size; ++m) {
    a(m) = std::polar(1.0, std::numbers::pi * m * s);
  }
  return a;
}

CVector draw_bs_user_link(std::mt19937_64 &rng, int bs_antennas, int taps,
                          double gain) {
  CVector g = CVector::Zero(bs_antennas);
  const double tap_var = 1.0 / taps;
  for (int t = 0; t < taps; ++t) {
    const double aoa = uniform(rng, 0.0, kTwoPi);
    const Complex amp = cn(rng, tap_var);
    g += amp * ula_response(bs_antennas, aoa);
  }
  return std::sqrt(gain) * g;
}

Complex draw_user_user_link(std::mt19937_64 &rng, int taps, double gain) {
  Complex h = 0.0;
  const double tap_var = 1.0 / taps;
  for (int t = 0; t < taps; ++t) h += cn(rng, tap_var);
  return std::sqrt(gain) * h;
}

Complex draw_ris_element(std::mt19937_64 &rng, int taps, double gain,
                         double rician_k, double los_phase) {
  // LoS carried by the first tap; scattered power split evenly over taps.
  const double los = std::sqrt(rician_k / (rician_k + 1.0));
  const double tap_var = 1.0 / ((rician_k + 1.0) * taps);
  Complex h = los * std::polar(1.0, los_phase);
  for (int t = 0; t < taps; ++t) h += cn(rng, tap_var);
  return std::sqrt(gain) * h;
}

CVector draw_ris_bs_column(std::mt19937_64 &rng, int bs_antennas, int taps,
                           double gain, double rician_k, double los_phase,
                           double los_aoa) {
  const double los = std::sqrt(rician_k / (rician_k + 1.0));
  const double tap_var = 1.0 / ((rician_k + 1.0) * taps);
  CVector col = los * std::polar(1.0, los_phase) *
                ula_response(bs_antennas, los_aoa);
  for (int t = 0; t < taps; ++t) {
    const double aoa = uniform(rng, 0.0, kTwoPi);
    const Complex amp = cn(rng, tap_var);
    col += amp * ula_response(bs_antennas, aoa);
  }
  return std::sqrt(gain) * col;
}

Geometry generate_geometry(const ScenarioConfig &cfg) {
  cfg.validate();
  Geometry geo;
  geo.bs = {0.0, 0.0};
  geo.ris = cfg.ris_positions;
  geo.bs_antennas = cfg.bs_antennas;
  geo.elements_per_ris = cfg.elements_per_ris;

  for (int k = 0; k < cfg.num_cu; ++k) {
    if (!cfg.cu_positions.empty()) {
      geo.cu.push_back(cfg.cu_positions[k]);
      continue;
    }
    auto rng = make_stream(cfg.rng_seed, {kTagCuPosition, std::uint64_t(k)});
    geo.cu.push_back(uniform_in_ring(rng, cfg.cu_ring[0], cfg.cu_ring[1]));
  }
  for (int j = 0; j < cfg.num_d2d; ++j) {
    auto rng = make_stream(cfg.rng_seed, {kTagD2dPosition, std::uint64_t(j)});
    const Point2 dt = cfg.dt_positions.empty()
                          ? uniform_in_ring(rng, 0.0, cfg.cell_radius)
                          : cfg.dt_positions[j];
    const double d = uniform(rng, cfg.d2d_distance[0], cfg.d2d_distance[1]);
    const double t = uniform(rng, 0.0, kTwoPi);
    geo.dt.push_back(dt);
    geo.dr.push_back({dt.x + d * std::cos(t), dt.y + d * std::sin(t)});
  }
  return geo;
}

ChannelSet generate_channels(const Geometry &geo, const FadingConfig &fading,
                             std::uint64_t seed) {
  fading.validate();
  const int K = static_cast<int>(geo.cu.size());
  const int J = static_cast<int>(geo.dt.size());
  const int L = static_cast<int>(geo.ris.size());
  const int M = geo.bs_antennas;
  const int N = geo.elements_per_ris;
  const double kf = db_to_linear(fading.rician_factor_ris_db);
  using U = std::uint64_t;

  ChannelSet ch;
  ch.num_cu = K;
  ch.num_d2d = J;
  ch.num_ris = L;
  ch.elements_per_ris = N;
  ch.bs_antennas = M;

  for (int k = 0; k < K; ++k) {
    auto rng = make_stream(seed, {kTagCuBs, U(k)});
    ch.g_cu_bs.push_back(draw_bs_user_link(
        rng, M, fading.taps_direct,
        path_gain(distance(geo.cu[k], geo.bs), fading.pathloss_exp_bs_user,
                  fading)));
  }
  ch.g_d2d.resize(J);
  ch.f_cu_dr.resize(K, J);
  for (int j = 0; j < J; ++j) {
    auto rng = make_stream(seed, {kTagD2d, U(j)});
    ch.g_d2d(j) = draw_user_user_link(
        rng, fading.taps_user_user,
        path_gain(distance(geo.dt[j], geo.dr[j]), fading.pathloss_exp_user_user,
                  fading));
    auto rng_bs = make_stream(seed, {kTagDtBs, U(j)});
    ch.f_dt_bs.push_back(draw_bs_user_link(
        rng_bs, M, fading.taps_direct,
        path_gain(distance(geo.dt[j], geo.bs), fading.pathloss_exp_bs_user,
                  fading)));
    for (int k = 0; k < K; ++k) {
      auto rng_i = make_stream(seed, {kTagCuDr, U(k), U(j)});
      ch.f_cu_dr(k, j) = draw_user_user_link(
          rng_i, fading.taps_user_user,
          path_gain(distance(geo.cu[k], geo.dr[j]),
                    fading.pathloss_exp_user_user, fading));
    }
  }

  // RIS-side LoS phase progresses across elements with the geometric angle;
  // scattered components are independent per element.
  auto ris_vector = [&](StreamTag tag, int l, int user, const Point2 &pos) {
    const Point2 &ris = geo.ris[l];
    const double gain =
        path_gain(distance(ris, pos), fading.pathloss_exp_ris, fading);
    const double s = std::sin(angle_of(ris, pos));
    CVector v(N);
    for (int n = 0; n < N; ++n) {
      auto rng = make_stream(seed, {U(tag), U(l), U(user), U(n)});
      v(n) = draw_ris_element(rng, fading.taps_ris, gain, kf,
                              std::numbers::pi * n * s);
    }
    return v;
  };

  ch.s_cu_ris.assign(L, {});
  ch.s_dt_ris.assign(L, {});
  ch.s_ris_dr.assign(L, {});
  for (int l = 0; l < L; ++l) {
    const Point2 &ris = geo.ris[l];
    const double gain =
        path_gain(distance(ris, geo.bs), fading.pathloss_exp_ris, fading);
    const double s = std::sin(angle_of(ris, geo.bs));
    const double aoa = angle_of(geo.bs, ris);
    CMatrix sb(M, N);
    for (int n = 0; n < N; ++n) {
      auto rng = make_stream(seed, {kTagRisBs, U(l), U(n)});
      sb.col(n) = draw_ris_bs_column(rng, M, fading.taps_ris, gain, kf,
                                     std::numbers::pi * n * s, aoa);
    }
    ch.s_ris_bs.push_back(std::move(sb));
    for (int k = 0; k < K; ++k) {
      ch.s_cu_ris[l].push_back(ris_vector(kTagCuRis, l, k, geo.cu[k]));
    }
    for (int j = 0; j < J; ++j) {
      ch.s_dt_ris[l].push_back(ris_vector(kTagDtRis, l, j, geo.dt[j]));
      ch.s_ris_dr[l].push_back(ris_vector(kTagRisDr, l, j, geo.dr[j]));
    }
  }
  return ch;
}

CsiRealization apply_csi_error(const CascadedChannels &truth,
                               const CsiErrorModel &model,
                               std::uint64_t seed) {
  truth.validate();
  model.validate();
  auto rng = make_stream(seed, {kTagCsi});
  auto fill = [&rng](CMatrix &m, double var) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        m(r, c) = var > 0.0 ? cn(rng, var) : Complex(0.0, 0.0);
  };
  auto fill_vec = [&rng](CVector &v, double var) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v(i) = var > 0.0 ? cn(rng, var) : Complex(0.0, 0.0);
  };

  CascadedChannels err = truth;
  for (auto &g : err.g_cu_bs) fill_vec(g, model.g_cu_bs);
  fill_vec(err.g_d2d, model.g_d2d);
  fill(err.f_cu_dr, model.f_cu_dr);
  for (auto &f : err.f_dt_bs) fill_vec(f, model.f_dt_bs);
  for (auto &q : err.q_d2d) fill_vec(q, model.q_d2d);
  for (auto &row : err.q_cu_dr)
    for (auto &q : row) fill_vec(q, model.q_cu_dr);
  for (auto &q : err.q_cu_bs) fill(q, model.q_cu_bs);
  for (auto &q : err.q_dt_bs) fill(q, model.q_dt_bs);

  return {subtract(truth, err), std::move(err)};
}

CsiRealization apply_csi_error(const ChannelSet &truth,
                               const CsiErrorModel &model,
                               std::uint64_t seed) {
  return apply_csi_error(cascade(truth), model, seed);
}

} // namespace risd2d
