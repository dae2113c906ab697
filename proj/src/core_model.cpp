#include "risd2d/core_model.hpp"

#include <algorithm>
#include <sstream>

namespace risd2d {

namespace {

void require(bool cond, const std::string &what) {
  if (!cond) {
    throw ConfigError(what);
  }
}

void require_len(const CVector &v, Eigen::Index n, const char *name) {
  if (v.size() != n) {
    std::ostringstream os;
    os << name << ": expected length " << n << ", got " << v.size();
    throw ConfigError(os.str());
  }
}

} // namespace

void ScenarioConfig::validate() const {
  require(num_d2d >= 1, "num_d2d must be >= 1");
  require(num_cu >= num_d2d, "num_cu must be >= num_d2d");
  require(num_ris >= 0, "num_ris must be >= 0");
  require(elements_per_ris >= 1 || num_ris == 0,
          "elements_per_ris must be >= 1");
  require(bs_antennas >= 1, "bs_antennas must be >= 1");
  require(p_max_cu > 0 && p_max_d2d > 0, "power limits must be positive");
  require(noise_dr > 0 && noise_bs > 0, "noise powers must be positive");
  require(qos_threshold >= 0, "qos_threshold must be nonnegative");
  require(cell_radius > 0, "cell_radius must be positive");
  require(static_cast<int>(ris_positions.size()) == num_ris,
          "ris_positions must have num_ris entries");
  require(cu_ring[0] >= 0 && cu_ring[0] <= cu_ring[1], "cu_ring is invalid");
  require(d2d_distance[0] > 0 && d2d_distance[0] <= d2d_distance[1],
          "d2d_distance is invalid");
  require(cu_positions.empty() ||
              static_cast<int>(cu_positions.size()) == num_cu,
          "cu_positions must be empty or have num_cu entries");
  require(dt_positions.empty() ||
              static_cast<int>(dt_positions.size()) == num_d2d,
          "dt_positions must be empty or have num_d2d entries");
}

void ChannelSet::validate() const {
  const int M = bs_antennas, N = elements_per_ris;
  require(static_cast<int>(g_cu_bs.size()) == num_cu, "g_cu_bs size");
  for (const auto &g : g_cu_bs) require_len(g, M, "g_cu_bs");
  require_len(g_d2d, num_d2d, "g_d2d");
  require(f_cu_dr.rows() == num_cu && f_cu_dr.cols() == num_d2d, "f_cu_dr");
  require(static_cast<int>(f_dt_bs.size()) == num_d2d, "f_dt_bs size");
  for (const auto &f : f_dt_bs) require_len(f, M, "f_dt_bs");
  require(static_cast<int>(s_cu_ris.size()) == num_ris &&
              static_cast<int>(s_ris_bs.size()) == num_ris &&
              static_cast<int>(s_dt_ris.size()) == num_ris &&
              static_cast<int>(s_ris_dr.size()) == num_ris,
          "RIS channel lists must have num_ris entries");
  for (int l = 0; l < num_ris; ++l) {
    require(static_cast<int>(s_cu_ris[l].size()) == num_cu, "s_cu_ris");
    for (const auto &s : s_cu_ris[l]) require_len(s, N, "s_cu_ris");
    require(s_ris_bs[l].rows() == M && s_ris_bs[l].cols() == N, "s_ris_bs");
    require(static_cast<int>(s_dt_ris[l].size()) == num_d2d, "s_dt_ris");
    for (const auto &s : s_dt_ris[l]) require_len(s, N, "s_dt_ris");
    require(static_cast<int>(s_ris_dr[l].size()) == num_d2d, "s_ris_dr");
    for (const auto &s : s_ris_dr[l]) require_len(s, N, "s_ris_dr");
  }
}

void CascadedChannels::validate() const {
  const int M = bs_antennas, NL = phase_dim;
  require(static_cast<int>(g_cu_bs.size()) == num_cu &&
              static_cast<int>(q_cu_bs.size()) == num_cu &&
              static_cast<int>(q_cu_dr.size()) == num_cu,
          "per-CU channel lists");
  require(static_cast<int>(f_dt_bs.size()) == num_d2d &&
              static_cast<int>(q_dt_bs.size()) == num_d2d &&
              static_cast<int>(q_d2d.size()) == num_d2d,
          "per-D2D channel lists");
  require_len(g_d2d, num_d2d, "g_d2d");
  require(f_cu_dr.rows() == num_cu && f_cu_dr.cols() == num_d2d, "f_cu_dr");
  for (int k = 0; k < num_cu; ++k) {
    require_len(g_cu_bs[k], M, "g_cu_bs");
    require(q_cu_bs[k].rows() == M && q_cu_bs[k].cols() == NL, "q_cu_bs");
    require(static_cast<int>(q_cu_dr[k].size()) == num_d2d, "q_cu_dr");
    for (const auto &q : q_cu_dr[k]) require_len(q, NL, "q_cu_dr");
  }
  for (int j = 0; j < num_d2d; ++j) {
    require_len(f_dt_bs[j], M, "f_dt_bs");
    require(q_dt_bs[j].rows() == M && q_dt_bs[j].cols() == NL, "q_dt_bs");
    require_len(q_d2d[j], NL, "q_d2d");
  }
}

CascadedChannels cascade(const ChannelSet &ch) {
  ch.validate();
  const int K = ch.num_cu, J = ch.num_d2d, L = ch.num_ris,
            N = ch.elements_per_ris, M = ch.bs_antennas, NL = L * N;

  CascadedChannels out;
  out.num_cu = K;
  out.num_d2d = J;
  out.bs_antennas = M;
  out.phase_dim = NL;
  out.g_cu_bs = ch.g_cu_bs;
  out.g_d2d = ch.g_d2d;
  out.f_cu_dr = ch.f_cu_dr;
  out.f_dt_bs = ch.f_dt_bs;

  // s_r^H Diag(s_t) theta = (conj(s_t) .* s_r)^H theta
  out.q_d2d.assign(J, CVector::Zero(NL));
  out.q_dt_bs.assign(J, CMatrix::Zero(M, NL));
  out.q_cu_dr.assign(K, std::vector<CVector>(J, CVector::Zero(NL)));
  out.q_cu_bs.assign(K, CMatrix::Zero(M, NL));
  for (int l = 0; l < L; ++l) {
    const auto block = Eigen::seqN(l * N, N);
    for (int j = 0; j < J; ++j) {
      out.q_d2d[j](block) =
          ch.s_dt_ris[l][j].conjugate().cwiseProduct(ch.s_ris_dr[l][j]);
      out.q_dt_bs[j](Eigen::all, block) =
          ch.s_ris_bs[l] * ch.s_dt_ris[l][j].asDiagonal();
    }
    for (int k = 0; k < K; ++k) {
      out.q_cu_bs[k](Eigen::all, block) =
          ch.s_ris_bs[l] * ch.s_cu_ris[l][k].asDiagonal();
      for (int j = 0; j < J; ++j) {
        out.q_cu_dr[k][j](block) =
            ch.s_cu_ris[l][k].conjugate().cwiseProduct(ch.s_ris_dr[l][j]);
      }
    }
  }
  return out;
}

CascadedChannels subtract(const CascadedChannels &a,
                          const CascadedChannels &b) {
  a.validate();
  b.validate();
  require(a.num_cu == b.num_cu && a.num_d2d == b.num_d2d &&
              a.bs_antennas == b.bs_antennas && a.phase_dim == b.phase_dim,
          "subtract: dimension mismatch");
  CascadedChannels out = a;
  out.g_d2d -= b.g_d2d;
  out.f_cu_dr -= b.f_cu_dr;
  for (int k = 0; k < a.num_cu; ++k) {
    out.g_cu_bs[k] -= b.g_cu_bs[k];
    out.q_cu_bs[k] -= b.q_cu_bs[k];
    for (int j = 0; j < a.num_d2d; ++j) out.q_cu_dr[k][j] -= b.q_cu_dr[k][j];
  }
  for (int j = 0; j < a.num_d2d; ++j) {
    out.f_dt_bs[j] -= b.f_dt_bs[j];
    out.q_dt_bs[j] -= b.q_dt_bs[j];
    out.q_d2d[j] -= b.q_d2d[j];
  }
  return out;
}

PhaseVector PhaseVector::ones(int dim) {
  return PhaseVector(CVector::Ones(dim));
}

PhaseVector PhaseVector::from_angles(const RVector &angles) {
  CVector v(angles.size());
  for (Eigen::Index i = 0; i < angles.size(); ++i) {
    v(i) = std::polar(1.0, angles(i));
  }
  return PhaseVector(std::move(v));
}

bool PhaseVector::on_manifold(double tol) const {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (std::abs(std::abs(values_(i)) - 1.0) > tol) return false;
  }
  return true;
}

void PhaseVector::retract() {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double m = std::abs(values_(i));
    values_(i) = m > 0.0 ? values_(i) / m : Complex(1.0, 0.0);
  }
}

Pairing::Pairing(int num_d2d, int num_cu)
    : num_cu_(num_cu), partner_(num_d2d, -1) {}

Pairing::Pairing(int num_cu, std::vector<int> partner)
    : num_cu_(num_cu), partner_(std::move(partner)) {
  validate();
}

int Pairing::partner_of_cu(int k) const {
  for (int j = 0; j < num_d2d(); ++j) {
    if (partner_[j] == k) return j;
  }
  return -1;
}

void Pairing::assign(int j, int k) {
  require(j >= 0 && j < num_d2d(), "Pairing::assign: D2D index out of range");
  require(k >= -1 && k < num_cu_, "Pairing::assign: CU index out of range");
  partner_[j] = k;
}

bool Pairing::complete() const {
  return std::none_of(partner_.begin(), partner_.end(),
                      [](int k) { return k < 0; });
}

void Pairing::validate() const {
  std::vector<int> used(num_cu_, 0);
  for (int k : partner_) {
    require(k >= -1 && k < num_cu_, "Pairing: CU index out of range");
    if (k >= 0) {
      require(++used[k] <= 1, "Pairing: CU reused by more than one D2D pair");
    }
  }
}

Eigen::MatrixXi Pairing::matrix() const {
  Eigen::MatrixXi rho = Eigen::MatrixXi::Zero(num_d2d(), num_cu_);
  for (int j = 0; j < num_d2d(); ++j) {
    if (partner_[j] >= 0) rho(j, partner_[j]) = 1;
  }
  return rho;
}

NoiseLevels NoiseLevels::uniform(const ScenarioConfig &cfg) {
  return uniform(cfg.num_d2d, cfg.num_cu, cfg.noise_dr, cfg.noise_bs);
}

NoiseLevels NoiseLevels::uniform(int num_d2d, int num_cu, double noise_dr,
                                 double noise_bs) {
  return {RVector::Constant(num_d2d, noise_dr),
          RVector::Constant(num_cu, noise_bs)};
}

EffectiveChannels compose_effective_channels(const ChannelSet &ch,
                                             const PhaseVector &phi) {
  ch.validate();
  const int K = ch.num_cu, J = ch.num_d2d, L = ch.num_ris,
            N = ch.elements_per_ris;
  if (phi.size() != ch.phase_dim()) {
    throw ConfigError("compose_effective_channels: phase vector length " +
                      std::to_string(phi.size()) + " != " +
                      std::to_string(ch.phase_dim()));
  }

  EffectiveChannels eff;
  eff.h_d2d = ch.g_d2d;
  eff.h_cu_dr = ch.f_cu_dr;
  eff.h_cu_bs = ch.g_cu_bs;
  eff.h_dt_bs = ch.f_dt_bs;
  for (int l = 0; l < L; ++l) {
    const CVector theta = phi.values().segment(l * N, N);
    for (int j = 0; j < J; ++j) {
      eff.h_d2d(j) += ch.s_ris_dr[l][j].dot(
          theta.cwiseProduct(ch.s_dt_ris[l][j]));
      eff.h_dt_bs[j] += ch.s_ris_bs[l] * theta.cwiseProduct(ch.s_dt_ris[l][j]);
    }
    for (int k = 0; k < K; ++k) {
      const CVector reflected = theta.cwiseProduct(ch.s_cu_ris[l][k]);
      eff.h_cu_bs[k] += ch.s_ris_bs[l] * reflected;
      for (int j = 0; j < J; ++j) {
        eff.h_cu_dr(k, j) += ch.s_ris_dr[l][j].dot(reflected);
      }
    }
  }
  return eff;
}

EffectiveChannels compose_effective_channels(const CascadedChannels &ch,
                                             const PhaseVector &phi) {
  if (phi.size() != ch.phase_dim) {
    throw ConfigError("compose_effective_channels: phase vector length " +
                      std::to_string(phi.size()) + " != " +
                      std::to_string(ch.phase_dim));
  }
  const CVector &p = phi.values();
  EffectiveChannels eff;
  eff.h_d2d = ch.g_d2d;
  eff.h_cu_dr = ch.f_cu_dr;
  eff.h_cu_bs = ch.g_cu_bs;
  eff.h_dt_bs = ch.f_dt_bs;
  if (ch.phase_dim == 0) return eff;
  for (int j = 0; j < ch.num_d2d; ++j) {
    eff.h_d2d(j) += ch.q_d2d[j].dot(p);
    eff.h_dt_bs[j] += ch.q_dt_bs[j] * p;
  }
  for (int k = 0; k < ch.num_cu; ++k) {
    eff.h_cu_bs[k] += ch.q_cu_bs[k] * p;
    for (int j = 0; j < ch.num_d2d; ++j) {
      eff.h_cu_dr(k, j) += ch.q_cu_dr[k][j].dot(p);
    }
  }
  return eff;
}

AggregatedCascades aggregate_cascades(const CascadedChannels &ch,
                                      const Pairing &pairing,
                                      const PowerAllocation &powers,
                                      const BeamformerSet &beams) {
  const int K = ch.num_cu, J = ch.num_d2d, NL = ch.phase_dim;
  require(pairing.num_d2d() == J && pairing.num_cu() == K,
          "aggregate_cascades: pairing dimensions");
  require(powers.p_cu.size() == K && powers.p_d2d.size() == J,
          "aggregate_cascades: power dimensions");
  require(static_cast<int>(beams.w.size()) == K,
          "aggregate_cascades: beamformer count");

  AggregatedCascades agg;
  agg.a.resize(J);
  agg.beta.assign(J, CVector::Zero(NL));
  agg.g_tilde_d.resize(J);
  agg.f_tilde_d = CVector::Zero(J);
  agg.alpha.resize(K);
  agg.g_tilde_c.resize(K);
  agg.b.assign(K, std::vector<CVector>(J));
  agg.f_tilde_c.resize(K, J);

  for (int j = 0; j < J; ++j) {
    const double sp = std::sqrt(powers.p_d2d(j));
    agg.a[j] = sp * ch.q_d2d[j];
    agg.g_tilde_d(j) = sp * ch.g_d2d(j);
    const int k = pairing.partner_of_d2d(j);
    if (k >= 0) {
      const CVector &w = beams.w[k];
      // beta^H phi = sqrt(P) w^H Q phi  =>  beta = sqrt(P) Q^H w
      agg.beta[j] = sp * ch.q_dt_bs[j].adjoint() * w;
      agg.f_tilde_d(j) = sp * w.dot(ch.f_dt_bs[j]);
    }
  }
  for (int k = 0; k < K; ++k) {
    const double sp = std::sqrt(powers.p_cu(k));
    const CVector &w = beams.w[k];
    agg.alpha[k] = sp * ch.q_cu_bs[k].adjoint() * w;
    agg.g_tilde_c(k) = sp * w.dot(ch.g_cu_bs[k]);
    for (int j = 0; j < J; ++j) {
      agg.b[k][j] = sp * ch.q_cu_dr[k][j];
      agg.f_tilde_c(k, j) = sp * ch.f_cu_dr(k, j);
    }
  }
  return agg;
}

SinrReport make_report(RVector gamma_d2d, RVector gamma_cu) {
  SinrReport r;
  r.rate_d2d = gamma_d2d.array().log1p();
  r.rate_cu = gamma_cu.array().log1p();
  r.sum_rate = r.rate_d2d.sum() + r.rate_cu.sum();
  r.gamma_d2d = std::move(gamma_d2d);
  r.gamma_cu = std::move(gamma_cu);
  return r;
}

SinrReport evaluate_sinr(const CascadedChannels &ch, const PhaseVector &phi,
                         const Pairing &pairing, const PowerAllocation &powers,
                         const BeamformerSet &beams,
                         const NoiseLevels &noise) {
  const int K = ch.num_cu, J = ch.num_d2d;
  require(static_cast<int>(beams.w.size()) == K, "evaluate_sinr: beams");
  require(noise.dr.size() == J && noise.bs.size() == K,
          "evaluate_sinr: noise dimensions");
  const EffectiveChannels eff = compose_effective_channels(ch, phi);

  RVector gd(J), gc(K);
  for (int j = 0; j < J; ++j) {
    double interference = 0.0;
    const int k = pairing.partner_of_d2d(j);
    if (k >= 0) interference = powers.p_cu(k) * std::norm(eff.h_cu_dr(k, j));
    gd(j) = powers.p_d2d(j) * std::norm(eff.h_d2d(j)) /
            (interference + noise.dr(j));
  }
  for (int k = 0; k < K; ++k) {
    const CVector &w = beams.w[k];
    double interference = 0.0;
    const int j = pairing.partner_of_cu(k);
    if (j >= 0) interference = powers.p_d2d(j) * std::norm(w.dot(eff.h_dt_bs[j]));
    gc(k) = powers.p_cu(k) * std::norm(w.dot(eff.h_cu_bs[k])) /
            (interference + noise.bs(k));
  }
  return make_report(std::move(gd), std::move(gc));
}

SinrReport evaluate_sinr(const ChannelSet &channels, const PhaseVector &phi,
                         const Pairing &pairing, const PowerAllocation &powers,
                         const BeamformerSet &beams,
                         const NoiseLevels &noise) {
  return evaluate_sinr(cascade(channels), phi, pairing, powers, beams, noise);
}

SinrReport sinr_from_cascades(const AggregatedCascades &agg,
                              const PhaseVector &phi, const Pairing &pairing,
                              const NoiseLevels &noise) {
  const int J = static_cast<int>(agg.a.size());
  const int K = static_cast<int>(agg.alpha.size());
  const CVector &p = phi.values();
  const bool has_ris = p.size() > 0;

  auto lin = [&](const Complex &c, const CVector &v) {
    return has_ris ? c + v.dot(p) : c;
  };

  RVector gd(J), gc(K);
  for (int j = 0; j < J; ++j) {
    const double num = std::norm(lin(agg.g_tilde_d(j), agg.a[j]));
    double den = noise.dr(j);
    for (int k = 0; k < K; ++k) {
      if (pairing.rho(j, k)) den += std::norm(lin(agg.f_tilde_c(k, j), agg.b[k][j]));
    }
    gd(j) = num / den;
  }
  for (int k = 0; k < K; ++k) {
    const double num = std::norm(lin(agg.g_tilde_c(k), agg.alpha[k]));
    double den = noise.bs(k);
    for (int j = 0; j < J; ++j) {
      if (pairing.rho(j, k)) den += std::norm(lin(agg.f_tilde_d(j), agg.beta[j]));
    }
    gc(k) = num / den;
  }
  return make_report(std::move(gd), std::move(gc));
}

RVector qos_residuals(const SinrReport &report, const ScenarioConfig &cfg) {
  return qos_residuals(report, cfg.qos_threshold);
}

RVector qos_residuals(const SinrReport &report, double threshold) {
  return report.gamma_cu.array() - threshold;
}

bool qos_feasible(const RVector &residuals, double tol) {
  return residuals.size() == 0 || residuals.minCoeff() >= -tol;
}

bool matched_qos_feasible(const SinrReport &report, const Pairing &pairing,
                          double threshold, double tol) {
  for (int j = 0; j < pairing.num_d2d(); ++j) {
    const int k = pairing.partner_of_d2d(j);
    if (k >= 0 && report.gamma_cu(k) - threshold < -tol) return false;
  }
  return true;
}

} // namespace risd2d
