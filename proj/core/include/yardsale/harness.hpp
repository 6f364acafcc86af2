#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "yardsale/analysis.hpp"
#include "yardsale/csv.hpp"
#include "yardsale/engine.hpp"
#include "yardsale/network.hpp"
#include "yardsale/observables.hpp"

namespace yardsale {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct TopologySpec {
  TopologyKind kind = TopologyKind::Complete;
  std::size_t n = 400;          // agents; square lattices need a perfect square
  double gamma = 0.0;           // Erdos-Renyi mean degree
  double link_density = 0.0;    // Erdos-Renyi alternative: gamma = d_l (n - 1)

  /// Requested mean degree: 2 (ring), 4 (square), n - 1 (complete).
  double nominal_gamma() const;
  double nominal_link_density() const { return nominal_gamma() / static_cast<double>(n - 1); }
  std::string label() const;
};

/// Builds the graph; `seed` only matters for Erdos-Renyi.
Network build_network(const TopologySpec& spec, std::uint64_t seed);

enum class StopRule {
  Auto,       // Condensed on the complete graph, Frozen elsewhere
  Fixed,      // exactly stop.sweeps sweeps
  Condensed,  // r(t) <= threshold
  Frozen,     // every LRA frozen at threshold
};

struct StopSpec {
  StopRule rule = StopRule::Auto;
  std::uint64_t sweeps = 0;  // Fixed only
  double threshold = kFreezeRatio;
  double cap_factor = 1e3;   // cap = cap_factor * N / theta (cap_factor * N when f = 1)
  std::uint64_t cap = 0;     // explicit cap; 0 uses cap_factor
};

/// Sweep budget of one history before it is flagged as timed out.
std::uint64_t sweep_cap(const StopSpec& stop, std::size_t n, const ExchangeParams& params);

struct StableSettings {
  std::uint64_t t_eq = 0;        // 0: equilibration_length per point
  std::size_t max_lag = 0;       // 0: doubled from 64 until c(tau) crosses the fit floor
  std::size_t max_lag_cap = 1 << 16;
  std::size_t window = 0;        // 0: 10 * max_lag
  double tolerance = 0.02;
  std::size_t probe_histories = 4;  // histories per equilibration probe
  DecayFitOptions decay;
  DivergenceFitOptions divergence;
};

struct LraSettings {
  TypeSplit split = TypeSplit::GlobalMean;
  std::size_t bins = 30;
  std::uint64_t census_cadence = 0;  // 0: no type-count time series
};

struct RankSettings {
  std::vector<std::size_t> ranks{1, 2, 3, 4, 10, 20};
  std::uint64_t sweeps = 0;  // 0: horizon * N / theta
  double horizon = 6.0;
};

/// One experiment: a grid over topologies x f x p. JSON keys are listed
/// in the README; unknown keys are rejected.
struct ExperimentConfig {
  std::string driver;  // informational
  std::vector<TopologySpec> topologies;
  std::vector<double> p_values;
  std::vector<double> p_offsets;  // alternative to p_values: p = p*(f) + offset
  std::vector<double> f_values;
  std::size_t histories = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;  // 0: hardware concurrency
  std::filesystem::path output = "results";
  SweepMode mode = SweepMode::Permutation;
  std::uint64_t cadence = 1;  // sweeps between stop checks and trace samples
  bool resample_network = false;  // fresh Erdos-Renyi graph per history
  StopSpec stop;
  StableSettings stable;
  LraSettings lra;
  RankSettings ranks;

  std::size_t p_count() const { return p_values.empty() ? p_offsets.size() : p_values.size(); }
  /// Grid value of p for f_values[f_index]; Domain error for offsets at f = 1.
  double p_at(std::size_t f_index, std::size_t p_index) const;

  /// InvalidParameter/InvalidSize on inconsistent settings.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct Ensemble {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(count)
  std::size_t count = 0;
};

Ensemble summarize(std::span<const double> samples);

/// Calls fn(k) for k in [0, count) on up to `threads` workers. Results must
/// be written to slot k so output order never depends on scheduling. The
/// first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Independent seed for grid cell `cell` of an experiment seeded `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t salt = 0);

/// Seed of the graph for topology index `topology`; history 0 is the graph
/// shared by all histories, h + 1 the resampled graph of history h.
std::uint64_t network_seed(std::uint64_t seed, std::size_t topology, std::uint64_t history = 0);

using ProgressFn = std::function<void(const std::string&)>;

/// Named output tables; file names are "<name>.csv".
using Tables = std::vector<std::pair<std::string, CsvTable>>;

void write_tables(const Tables& tables, const std::filesystem::path& directory);

// ---------------------------------------------------------------------------
// Stable phase: tau0(p, f) and the critical line
// ---------------------------------------------------------------------------

struct GridPoint {
  TopologySpec topology;
  double gamma = 0.0;  // realized mean degree
  double p = 0.0;
  double f = 0.0;
};

struct StablePoint {
  GridPoint point;
  std::uint64_t t_eq = 0;
  std::size_t max_lag = 0;
  CorrelationEstimate correlation;
  std::optional<FitResult> fit;
  std::string status = "ok";  // error tag otherwise
  std::string message;
};

struct CriticalLinePoint {
  TopologySpec topology;
  double gamma = 0.0;
  double f = 0.0;
  std::size_t n_points = 0;
  std::optional<FitResult> fit;
  std::string status = "ok";
  std::string message;
};

struct StablePhaseResult {
  std::vector<StablePoint> points;
  std::vector<CriticalLinePoint> lines;
};

StablePhaseResult measure_stable_phase(const ExperimentConfig& config, const ProgressFn& progress = {});
Tables stable_phase_tables(const StablePhaseResult& result, const ExperimentConfig& config);
Tables drive_stable_phase(const ExperimentConfig& config, const ProgressFn& progress = {});

// ---------------------------------------------------------------------------
// Unstable phase: condensation, LRA census and ranked traces
// ---------------------------------------------------------------------------

struct HistoryEnd {
  std::uint64_t sweeps = 0;
  bool timed_out = false;
  LraReport lras;
  double w2 = 0.0;
  double ratio = 0.0;
  std::vector<LraCensusSample> census;
};

struct UnstablePoint {
  GridPoint point;
  std::uint64_t cap = 0;
  std::vector<HistoryEnd> histories;  // in history order

  std::size_t timeouts() const;
  /// Stop times of the histories that did not time out.
  Ensemble t0() const;
  Ensemble rho() const;
  Ensemble w2() const;
};

/// Runs every grid point to its stop rule. Grid points must be unstable
/// (p < p*(f)) unless the stop rule is Fixed.
std::vector<UnstablePoint> measure_unstable(const ExperimentConfig& config, bool census,
                                            const ProgressFn& progress = {});

Tables condensation_tables(std::span<const UnstablePoint> points, const ExperimentConfig& config);
Tables lra_tables(std::span<const UnstablePoint> points, const ExperimentConfig& config);

Tables drive_condensation(const ExperimentConfig& config, const ProgressFn& progress = {});
Tables drive_lra_census(const ExperimentConfig& config, const ProgressFn& progress = {});

struct RankedTraces {
  GridPoint point;
  std::uint64_t sweeps = 0;
  std::vector<std::size_t> ranks;
  std::vector<std::uint64_t> times;
  std::vector<std::vector<Ensemble>> relative;  // w_R / W_T, [rank][sample]
  std::vector<Ensemble> ratio;
  std::vector<Ensemble> w2;
  std::vector<std::vector<double>> theory;  // complete graph only, else empty

  /// Sample time at which the ensemble-mean trace of ranks[k] is largest.
  std::uint64_t peak_time(std::size_t k) const;
};

/// One trace set per grid point, fixed duration (RankSettings).
std::vector<RankedTraces> measure_ranked_traces(const ExperimentConfig& config,
                                                const ProgressFn& progress = {});
Tables ranked_trace_tables(std::span<const RankedTraces> traces, const ExperimentConfig& config);
Tables drive_ranked_traces(const ExperimentConfig& config, const ProgressFn& progress = {});

}  // namespace yardsale
