#include "fixtures.hpp"
#include "oracles.hpp"
#include "risd2d/experiments.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace risd2d;

namespace {

ExperimentSpec tiny_spec() {
  ExperimentSpec s;
  s.name = "tiny";
  s.scenario = fixture::small_scenario(2, 1, 2, 3);
  s.sweep = SweepVariable::kP;
  s.values = {10.0, 13.0};
  s.num_seeds = 3;
  s.baselines = {Scheme::kNoRis, Scheme::kRandomPhase};
  s.bcd.max_outer_iter = 5;
  s.workers = 2;
  return s;
}

std::filesystem::path temp_dir() {
  auto d = std::filesystem::temp_directory_path() / "risd2d_unit";
  std::filesystem::create_directories(d);
  return d;
}

} // namespace

TEST(Experiments, RunsAreDeterministicAcrossWorkerCounts) {
  ExperimentSpec s = tiny_spec();
  const auto a = run_experiment(s);
  s.workers = 1;
  const auto b = run_experiment(s);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.size(), 6u);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i].same_values(b[i])) << i;
  // Row order: sweep value, then proposed before baselines.
  EXPECT_EQ(a[0].scheme, "proposed");
  EXPECT_EQ(a[1].scheme, "no-ris");
  EXPECT_EQ(a[2].scheme, "random-phase");
  EXPECT_EQ(a[3].sweep_value, 13.0);
}

TEST(Experiments, ProposedBeatsBaselinesOnMostSeeds) {
  ExperimentSpec s = tiny_spec();
  s.values = {15.0};
  s.num_seeds = 10;
  std::vector<InstanceResult> inst;
  run_experiment(s, &inst);
  int wins_nr = 0, wins_rp = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    double p = 0, nr = 0, rp = 0;
    for (const auto &r : inst) {
      if (r.seed != seed) continue;
      ASSERT_TRUE(r.ok) << r.error;
      if (r.scheme == Scheme::kProposed) p = r.sum_rate;
      if (r.scheme == Scheme::kNoRis) nr = r.sum_rate;
      if (r.scheme == Scheme::kRandomPhase) rp = r.sum_rate;
    }
    wins_nr += p >= nr;
    wins_rp += p >= rp;
  }
  EXPECT_GE(wins_nr, 9);
  EXPECT_GE(wins_rp, 9);
}

TEST(Experiments, EmptyBaselinesGiveProposedOnly) {
  ExperimentSpec s = tiny_spec();
  s.baselines.clear();
  s.num_seeds = 1;
  const auto rows = run_experiment(s);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto &r : rows) EXPECT_EQ(r.scheme, "proposed");
}

TEST(Experiments, CsvRoundTrip) {
  std::vector<ResultRow> rows(2);
  rows[0].sweep_value = 0.1;
  rows[0].scheme = "proposed";
  rows[0].num_seeds = 20;
  rows[0].mean_sum_rate = 1.0 / 3.0;
  rows[0].std_sum_rate = 2.5e-17;
  rows[0].wall_seconds = 12.75;
  rows[1].scheme = "no-ris";
  rows[1].num_errors = 2;
  rows[1].mean_sum_rate = std::numeric_limits<double>::quiet_NaN();
  const std::string text = results_to_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  const auto back = results_from_csv(text);
  ASSERT_EQ(back.size(), 2u);
  for (size_t i = 0; i < rows.size(); ++i) {
    EXPECT_TRUE(rows[i].same_values(back[i]));
    EXPECT_EQ(rows[i].wall_seconds, back[i].wall_seconds);
  }
  const auto path = (temp_dir() / "rt" / "rows.csv").string();
  export_results(rows, ExportFormat::kCsv, path);
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  const auto disk = read_results_csv(path);
  EXPECT_TRUE(disk[0].same_values(rows[0]));
}

TEST(Experiments, AtomicWriteReportsPath) {
  const auto blocker = temp_dir() / "not_a_dir";
  { std::ofstream(blocker) << "x"; }
  const std::string bad = (blocker / "out.csv").string();
  try {
    write_file_atomic(bad, "data");
    FAIL() << "expected an exception";
  } catch (const std::runtime_error &e) {
    EXPECT_NE(std::string(e.what()).find(bad), std::string::npos);
  }
}

TEST(Experiments, SpecJsonRoundTrip) {
  ExperimentSpec s = tiny_spec();
  s.csi = CsiErrorModel::uniform(1e-14);
  json j = s;
  const ExperimentSpec back = j.get<ExperimentSpec>();
  EXPECT_EQ(json(back), j);
  EXPECT_EQ(back.baselines.size(), 2u);
  ASSERT_TRUE(back.csi.has_value());
  EXPECT_EQ(back.csi->q_cu_bs, 1e-14);
}

TEST(Experiments, ReplayReproducesStoredSolution) {
  ExperimentSpec s = tiny_spec();
  const ReplayRecord rec = make_replay_record(s, 13.0, Scheme::kProposed, 2);
  const json j = rec;
  const ReplayRecord back = j.get<ReplayRecord>();
  const ReplayCheck c = replay(back, 1e-9);
  EXPECT_TRUE(c.match);
  EXPECT_NEAR(c.reevaluated_sum_rate, c.recorded_sum_rate, 1e-9);
  EXPECT_NEAR(c.resolved_sum_rate, c.recorded_sum_rate, 1e-9);
}

TEST(Experiments, ApplySweepAndDeployments) {
  ScenarioConfig c;
  EXPECT_NEAR(apply_sweep(c, SweepVariable::kP, 10.0).p_max_cu, 0.01, 1e-15);
  EXPECT_EQ(apply_sweep(c, SweepVariable::kN, 7).elements_per_ris, 7);
  EXPECT_EQ(apply_sweep(c, SweepVariable::kM, 8).bs_antennas, 8);
  EXPECT_EQ(apply_sweep(c, SweepVariable::kQos, 2.0).qos_threshold, 2.0);
  const ScenarioConfig dt = apply_sweep(c, SweepVariable::kDtX, 250);
  ASSERT_EQ(dt.dt_positions.size(), size_t(c.num_d2d));
  EXPECT_EQ(dt.dt_positions[0].x, 250.0);
  const ScenarioConfig t = apply_sweep(c, SweepVariable::kTotalElements, 24);
  EXPECT_EQ(t.phase_dim(), 24);
  const ScenarioConfig cen = centralized_deployment(c, 40);
  EXPECT_EQ(cen.num_ris, 1);
  EXPECT_EQ(cen.elements_per_ris, 40);
  const ScenarioConfig dis = distributed_deployment(c, 40);
  EXPECT_EQ(dis.num_ris, 4);
  EXPECT_EQ(dis.elements_per_ris, 10);
  EXPECT_THROW(distributed_deployment(c, 42), ConfigError);
}

TEST(Experiments, NoRisGivesZeroReflectedPower) {
  ExperimentSpec s = tiny_spec();
  const InstanceInputs in = prepare_instance(s, 10.0, Scheme::kNoRis, 4);
  EXPECT_EQ(in.channels.num_ris, 0);
  const BcdOutput out = bcd_solve(in.channels, in.scenario, in.bcd);
  const PowerProportionReport rep = power_proportion_report(out.solution, in.channels);
  for (const auto *c : {&rep.bs_total, &rep.dr_total}) {
    EXPECT_EQ(c->reflected_useful, 0.0);
    EXPECT_EQ(c->cross_useful, 0.0);
    EXPECT_EQ(c->reflected_interference, 0.0);
    EXPECT_EQ(c->cross_interference, 0.0);
  }
}

TEST(Experiments, PowerDecompositionSumsToSinrTerms) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto in = fixture::fp_instance(seed, fixture::small_scenario(3, 2, 2, 4));
    const auto &sol = in.sol;
    const PowerProportionReport rep = power_proportion_report(sol, in.ch);
    const EffectiveChannels eff = compose_effective_channels(in.ch, sol.phi);
    for (int k = 0; k < in.cfg.num_cu; ++k) {
      const double num = sol.powers.p_cu(k) * std::norm(sol.beams.w[k].dot(eff.h_cu_bs[k]));
      EXPECT_LE(std::abs(rep.bs[k].useful() - num), 1e-9 * num);
      const double g = num / (rep.bs[k].interference() + sol.noise.bs(k));
      EXPECT_LE(std::abs(g - sol.report.gamma_cu(k)), 1e-9 * g);
      if (sol.pairing.partner_of_cu(k) < 0) EXPECT_EQ(rep.bs[k].interference(), 0.0);
    }
    for (int j = 0; j < in.cfg.num_d2d; ++j) {
      const double num = sol.powers.p_d2d(j) * std::norm(eff.h_d2d(j));
      EXPECT_LE(std::abs(rep.dr[j].useful() - num), 1e-9 * std::max(num, 1e-300));
    }
  }
}

TEST(Experiments, PresetsValidate) {
  const auto names = preset_names();
  EXPECT_GE(names.size(), 10u);
  for (const auto &n : names) {
    const ExperimentSpec p = preset(n);
    EXPECT_NO_THROW(p.validate()) << n;
    EXPECT_FALSE(p.values.empty());
  }
  EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(Experiments, FailedInstanceIsRecordedNotThrown) {
  ExperimentSpec s = tiny_spec();
  s.sweep = SweepVariable::kDeployment;
  s.values = {3.0}; // not a deployment code
  EXPECT_THROW(run_experiment(s), ConfigError);
  const InstanceResult bad = run_instance(s, 3.0, Scheme::kProposed, 1);
  EXPECT_FALSE(bad.ok);
  EXPECT_FALSE(bad.error.empty());
  const auto rows = aggregate({bad});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].num_errors, 1);
  EXPECT_TRUE(std::isnan(rows[0].mean_sum_rate));
}
