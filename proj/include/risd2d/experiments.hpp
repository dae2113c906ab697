#pragma once

#include "risd2d/serialization.hpp"

#include <optional>
#include <string>
#include <vector>

namespace risd2d {

enum class SweepVariable {
  kN,             // elements per RIS
  kM,             // BS antennas
  kP,             // common maximum power, dBm
  kQos,           // CU SINR threshold, linear
  kJ,             // number of D2D pairs
  kDtX,           // DT horizontal coordinate, m (all DTs on the x axis)
  kTotalElements, // total reflecting elements, split evenly over the RISs
  kDeployment,    // 0 centralized, 1 distributed, same total elements
};

enum class Scheme {
  kProposed,
  kNoRis,
  kRandomPhase,
  kFixedMaxPower,
  kCentralized,
  kDistributed,
};

const char *to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string &s);
const char *to_string(Scheme s);
Scheme scheme_from_string(const std::string &s);

struct ExperimentSpec {
  std::string name = "experiment";
  ScenarioConfig scenario;
  FadingConfig fading;
  BcdConfig bcd;
  SweepVariable sweep = SweepVariable::kP;
  std::vector<double> values;
  int num_seeds = 1;
  std::uint64_t seed_base = 1;
  /// The proposed scheme always runs; these are added next to it.
  std::vector<Scheme> baselines;
  /// Imperfect CSI: solve on estimates with the lower-bound pipeline.
  std::optional<CsiErrorModel> csi;
  int workers = 0; // 0: default_workers()
  std::string output_path;
  bool save_traces = false;

  void validate() const;
};

void to_json(json &j, const ExperimentSpec &s);
void from_json(const json &j, ExperimentSpec &s);

/// Received power at one receiver split by path. Cross terms are the
/// coherent direct/reflected products, so direct + reflected + cross equals
/// the full received power.
struct PowerComponents {
  double direct_useful = 0.0;
  double reflected_useful = 0.0;
  double cross_useful = 0.0;
  double direct_interference = 0.0;
  double reflected_interference = 0.0;
  double cross_interference = 0.0;

  double useful() const { return direct_useful + reflected_useful + cross_useful; }
  double interference() const {
    return direct_interference + reflected_interference + cross_interference;
  }
};

struct PowerProportionReport {
  std::vector<PowerComponents> bs; // [k], after the receive beamformer
  std::vector<PowerComponents> dr; // [j]
  PowerComponents bs_total;
  PowerComponents dr_total;
  /// Totals divided by the largest of their four direct/reflected entries.
  PowerComponents bs_normalized;
  PowerComponents dr_normalized;
};

/// One solved (sweep value, scheme, seed) instance.
struct InstanceResult {
  double sweep_value = 0.0;
  Scheme scheme = Scheme::kProposed;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double sum_rate = 0.0;
  double rate_d2d = 0.0; // summed over pairs
  double rate_cu = 0.0;  // summed over CUs
  bool qos_violated = false;
  bool infeasible = false;
  int iterations = 0;
  bool converged = false;
  int decrease_events = 0;
  double max_decrease = 0.0;
  double wall_seconds = 0.0;
  std::optional<BcdOutput> output; // kept when traces are requested
  std::optional<PowerProportionReport> power;
};

struct ResultRow {
  double sweep_value = 0.0;
  std::string scheme;
  int num_seeds = 0;
  int num_errors = 0;
  double mean_sum_rate = 0.0;
  double std_sum_rate = 0.0;
  double mean_rate_d2d = 0.0;
  double mean_rate_cu = 0.0;
  double qos_violation_fraction = 0.0;
  double infeasible_fraction = 0.0;
  double mean_outer_iterations = 0.0;
  double wall_seconds = 0.0;

  /// Equality on everything except wall time.
  bool same_values(const ResultRow &o) const;
};

/// Scenario at one sweep point.
ScenarioConfig apply_sweep(ScenarioConfig cfg, SweepVariable v, double value);

/// Single RIS holding all elements at (radius, 0).
ScenarioConfig centralized_deployment(ScenarioConfig cfg, int total_elements);
/// Four RISs at the cell edge sharing the elements evenly.
ScenarioConfig distributed_deployment(ScenarioConfig cfg, int total_elements);

/// Same realization with every RIS path removed.
ChannelSet strip_ris(const ChannelSet &channels);

struct InstanceInputs {
  ScenarioConfig scenario;
  BcdConfig bcd;
  ChannelSet channels;
};

/// Scenario, solver settings and channels a scheme sees for one seed.
InstanceInputs prepare_instance(const ExperimentSpec &spec, double sweep_value,
                                Scheme scheme, std::uint64_t seed);

InstanceResult run_instance(const ExperimentSpec &spec, double sweep_value,
                            Scheme scheme, std::uint64_t seed);

/// Rows ordered by sweep value then scheme order; instances optionally
/// returned in the same order with seeds innermost.
std::vector<ResultRow> run_experiment(const ExperimentSpec &spec,
                                      std::vector<InstanceResult> *instances =
                                          nullptr);

std::vector<ResultRow> aggregate(const std::vector<InstanceResult> &instances);

PowerProportionReport power_proportion_report(const SolutionState &solution,
                                              const ChannelSet &channels);
PowerProportionReport power_proportion_report(const SolutionState &solution,
                                              const CascadedChannels &channels);

void to_json(json &j, const PowerComponents &c);
void to_json(json &j, const PowerProportionReport &r);

void to_json(json &j, const ResultRow &r);
void from_json(const json &j, ResultRow &r);
json instance_to_json(const InstanceResult &r);

inline constexpr const char *kCsvHeader =
    "sweep_value,scheme,num_seeds,num_errors,mean_sum_rate,std_sum_rate,"
    "mean_rate_d2d,mean_rate_cu,qos_violation_fraction,infeasible_fraction,"
    "mean_outer_iterations,wall_seconds";

enum class ExportFormat { kCsv, kJson };

/// Writes through a temporary file and a rename. Throws std::runtime_error
/// naming the path on I/O failure.
void write_file_atomic(const std::string &path, const std::string &contents);

std::string results_to_csv(const std::vector<ResultRow> &rows);
std::vector<ResultRow> results_from_csv(const std::string &text);
std::vector<ResultRow> read_results_csv(const std::string &path);

/// Writes rows (and instance traces when given) to path.
void export_results(const std::vector<ResultRow> &rows, ExportFormat format,
                    const std::string &path, const ExperimentSpec *spec = nullptr,
                    const std::vector<InstanceResult> *instances = nullptr);

/// Self-contained record of one solved instance for replay.
struct ReplayRecord {
  ScenarioConfig scenario;
  FadingConfig fading;
  BcdConfig bcd;
  std::optional<CsiErrorModel> csi;
  std::uint64_t seed = 0;
  std::string scheme;
  ChannelSet channels;
  SolutionState solution;
  BcdTrace trace;
};

void to_json(json &j, const ReplayRecord &r);
void from_json(const json &j, ReplayRecord &r);

ReplayRecord make_replay_record(const ExperimentSpec &spec, double sweep_value,
                                Scheme scheme, std::uint64_t seed);

struct ReplayCheck {
  double recorded_sum_rate = 0.0;
  double reevaluated_sum_rate = 0.0; // stored solution on stored channels
  double resolved_sum_rate = 0.0;    // solver rerun from scratch
  bool match = false;
};

ReplayCheck replay(const ReplayRecord &record, double tol = 1e-9);

/// Named studies with their scenario settings.
std::vector<std::string> preset_names();
ExperimentSpec preset(const std::string &name);

} // namespace risd2d
