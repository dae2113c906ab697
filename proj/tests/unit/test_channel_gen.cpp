#include "oracles.hpp"
#include "risd2d/channel_gen.hpp"

#include <gtest/gtest.h>

using namespace risd2d;

TEST(ChannelGen, PathLossLogLinearRegression) {
  FadingConfig f;
  std::vector<double> x, y;
  for (double d = 2.0; d < 1000.0; d *= 1.37) {
    x.push_back(std::log10(d));
    y.push_back(10.0 * std::log10(path_gain(d, 3.8, f)));
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  EXPECT_NEAR(slope, -38.0, 1e-9);
  EXPECT_NEAR(my - slope * mx, -f.reference_loss_db, 1e-9);
  EXPECT_EQ(path_gain(0.2, 3.8, f), path_gain(1.0, 3.8, f));
}

TEST(ChannelGen, RayleighMoments) {
  auto rng = make_stream(11, {1});
  const int n = 40000;
  const double gain = 2.5;
  Complex mean = 0;
  double power = 0;
  for (int i = 0; i < n; ++i) {
    const Complex h = draw_user_user_link(rng, 16, gain);
    mean += h;
    power += std::norm(h);
  }
  EXPECT_NEAR(power / n, gain, 0.03 * gain);
  EXPECT_LT(std::abs(mean / double(n)), 0.03);
}

TEST(ChannelGen, ArrayLinkMoments) {
  auto rng = make_stream(12, {1});
  const int n = 20000, M = 4;
  double power = 0;
  for (int i = 0; i < n; ++i) power += draw_bs_user_link(rng, M, 16, 1.0).squaredNorm();
  EXPECT_NEAR(power / n, M, 0.03 * M);
}

TEST(ChannelGen, RicianMoments) {
  auto rng = make_stream(13, {1});
  const int n = 40000;
  const double k = db_to_linear(10.0), psi = 0.7;
  Complex mean = 0;
  double power = 0;
  for (int i = 0; i < n; ++i) {
    const Complex h = draw_ris_element(rng, 4, 1.0, k, psi);
    mean += h;
    power += std::norm(h);
  }
  mean /= double(n);
  EXPECT_NEAR(power / n, 1.0, 0.02);
  const Complex los = std::sqrt(k / (k + 1)) * std::polar(1.0, psi);
  EXPECT_LT(std::abs(mean - los), 0.01);
  // Scattered variance 1/(K+1).
  EXPECT_NEAR(power / n - std::norm(mean), 1.0 / (k + 1), 0.01);
}

TEST(ChannelGen, GeometryRespectsRegions) {
  ScenarioConfig c;
  c.num_cu = 3;
  c.num_d2d = 3;
  int inner_half = 0, total = 0;
  const double split = std::sqrt((400.0 * 400.0 + 500.0 * 500.0) / 2.0);
  for (std::uint64_t s = 1; s <= 400; ++s) {
    c.rng_seed = s;
    const Geometry g = generate_geometry(c);
    for (int k = 0; k < 3; ++k) {
      const double d = distance(g.cu[k], g.bs);
      ASSERT_GE(d, 400.0 - 1e-9);
      ASSERT_LE(d, 500.0 + 1e-9);
      inner_half += d < split;
      ++total;
    }
    for (int j = 0; j < 3; ++j) {
      EXPECT_LE(distance(g.dt[j], g.bs), 500.0 + 1e-9);
      const double dd = distance(g.dt[j], g.dr[j]);
      EXPECT_GE(dd, 10.0 - 1e-9);
      EXPECT_LE(dd, 30.0 + 1e-9);
    }
  }
  // Area-uniform: half the ring area lies inside `split`.
  EXPECT_NEAR(double(inner_half) / total, 0.5, 0.05);
}

TEST(ChannelGen, PinnedPositions) {
  ScenarioConfig c;
  c.num_cu = 1;
  c.num_d2d = 1;
  c.cu_positions = {{400, 0}};
  c.dt_positions = {{250, 0}};
  const Geometry g = generate_geometry(c);
  EXPECT_EQ(g.cu[0].x, 400.0);
  EXPECT_EQ(g.dt[0].x, 250.0);
}

TEST(ChannelGen, DeterministicAndSeedSensitive) {
  ScenarioConfig c;
  FadingConfig f;
  const ChannelSet a = generate_channels(generate_geometry(c), f, 5);
  const ChannelSet b = generate_channels(generate_geometry(c), f, 5);
  const ChannelSet d = generate_channels(generate_geometry(c), f, 6);
  EXPECT_EQ(a.g_cu_bs[0], b.g_cu_bs[0]);
  EXPECT_EQ(a.s_ris_bs[2], b.s_ris_bs[2]);
  EXPECT_NE(a.g_cu_bs[0], d.g_cu_bs[0]);
  EXPECT_NO_THROW(a.validate());
}

TEST(ChannelGen, LargerArrayExtendsSmaller) {
  ScenarioConfig c;
  FadingConfig f;
  c.elements_per_ris = 5;
  c.bs_antennas = 2;
  const ChannelSet small = generate_channels(generate_geometry(c), f, 9);
  c.elements_per_ris = 10;
  const ChannelSet big = generate_channels(generate_geometry(c), f, 9);
  for (int l = 0; l < c.num_ris; ++l) {
    EXPECT_EQ(small.s_cu_ris[l][1], big.s_cu_ris[l][1].head(5));
    EXPECT_EQ(small.s_dt_ris[l][0], big.s_dt_ris[l][0].head(5));
  }
  EXPECT_EQ(small.g_d2d, big.g_d2d);
}

TEST(ChannelGen, CsiErrorZeroVarianceIsExact) {
  ScenarioConfig c;
  const ChannelSet ch = generate_channels(generate_geometry(c), FadingConfig{}, 3);
  const CascadedChannels truth = cascade(ch);
  const CsiRealization r = apply_csi_error(ch, CsiErrorModel{}, 3);
  EXPECT_EQ(r.estimated.q_cu_bs[1], truth.q_cu_bs[1]);
  EXPECT_EQ(r.estimated.g_d2d, truth.g_d2d);
  EXPECT_EQ(r.error.q_d2d[0].squaredNorm(), 0.0);
}

TEST(ChannelGen, CsiErrorVarianceMatches) {
  oracle::Rng rng(4);
  const CascadedChannels truth =
      cascade(oracle::random_channels(rng, 2, 2, 4, 25, 4));
  CsiErrorModel m;
  m.q_cu_bs = 0.3;
  m.g_d2d = 0.0;
  double acc = 0;
  long cnt = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const CsiRealization r = apply_csi_error(truth, m, s);
    for (const auto &q : r.error.q_cu_bs) {
      acc += q.squaredNorm();
      cnt += q.size();
    }
    const CascadedChannels back = subtract(truth, r.estimated);
    EXPECT_LT((back.q_cu_bs[0] - r.error.q_cu_bs[0]).norm(), 1e-12);
  }
  EXPECT_NEAR(acc / cnt, 0.3, 0.01);
}

TEST(ChannelGen, InvalidConfigsThrow) {
  FadingConfig f;
  f.taps_ris = 0;
  EXPECT_THROW(f.validate(), ConfigError);
  EXPECT_THROW(CsiErrorModel::uniform(-1.0).validate(), ConfigError);
}
