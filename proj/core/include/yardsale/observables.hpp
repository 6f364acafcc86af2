#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "yardsale/engine.hpp"
#include "yardsale/network.hpp"

namespace yardsale {

inline constexpr double kFreezeRatio = 1e-4;

// ---------------------------------------------------------------------------
// Time correlations of equilibrium fluctuations
// ---------------------------------------------------------------------------

/// Wealth snapshots taken once per sweep, stored time-major.
class Trajectory {
 public:
  explicit Trajectory(std::size_t n_agents) : n_agents_(n_agents) {}

  void push(std::span<const double> wealth);
  void reserve(std::size_t snapshots) { data_.reserve(snapshots * n_agents_); }
  void clear() { data_.clear(); }

  std::size_t n_agents() const noexcept { return n_agents_; }
  std::size_t n_snapshots() const noexcept { return n_agents_ == 0 ? 0 : data_.size() / n_agents_; }
  std::span<const double> snapshot(std::size_t t) const {
    return {data_.data() + t * n_agents_, n_agents_};
  }

 private:
  std::size_t n_agents_;
  std::vector<double> data_;
};

struct CorrelationEstimate {
  std::vector<double> taus;  // 0, 1, ..., max_lag (sweeps)
  std::vector<double> c;     // C(tau) / C(0); c[0] == 1
  std::size_t t_window = 0;  // averaging length T
  double c_zero = 0.0;       // unnormalized C(0), the fluctuation variance
};

/// Normalized autocorrelation of the excess wealth dw_i(t) = w_i(t) - W_T/N,
///   C(tau) = 1/(N T) sum_{t<T} sum_i dw_i(t) dw_i(t + tau),
/// for tau = 0..max_lag. `window` = 0 selects T = 10 max_lag. Needs at least
/// T + max_lag snapshots (InsufficientData) and nonzero fluctuations
/// (DegenerateInput). Lag sums are evaluated with real FFTs.
CorrelationEstimate correlation(const Trajectory& trajectory, std::size_t max_lag,
                                std::size_t window = 0);

/// Pointwise mean of estimates sharing the same lags; c[0] stays 1.
CorrelationEstimate average_correlations(std::span<const CorrelationEstimate> estimates);

// ---------------------------------------------------------------------------
// Condensation measures
// ---------------------------------------------------------------------------

/// r = second-largest / largest wealth.
double condensation_ratio(std::span<const double> wealth);

/// Participation moment W2 = sum w^2 / (sum w)^2, in [1/N, 1].
double w2(std::span<const double> wealth);

/// Wealths at the requested 1-based ranks, richest first; ties ordered by
/// agent index.
std::vector<double> ranked_wealths(std::span<const double> wealth, std::span<const std::size_t> ranks);

// ---------------------------------------------------------------------------
// Locally rich agents
// ---------------------------------------------------------------------------

/// Reference wealth splitting type-1 (w >= ref) from type-2 (w < ref) LRAs.
enum class TypeSplit { GlobalMean, LraMean };

struct LraReport {
  std::vector<std::uint32_t> lra_indices;
  std::vector<double> lra_wealths;
  double rho = 0.0;  // |LRA| / N
  std::size_t n_type1 = 0;
  std::size_t n_type2 = 0;
  bool frozen = false;  // at kFreezeRatio; false when the set is empty
};

/// All agents strictly richer than every neighbor. Throws Dimension on size
/// mismatch; verifies the independent-set property on every call.
LraReport find_lras(std::span<const double> wealth, const Network& net,
                    TypeSplit split = TypeSplit::GlobalMean);

enum class FreezeStatus { Frozen, Active, NoLra };

/// Early-exit scan: Active as soon as one LRA's richest neighbor exceeds
/// ratio_threshold times its wealth; NoLra when no agent is a strict local
/// maximum.
FreezeStatus freeze_status(std::span<const double> wealth, const Network& net,
                           double ratio_threshold = kFreezeRatio);

/// True iff every LRA out-owns its richest neighbor by 1/ratio_threshold.
/// NotApplicable when there are no LRAs.
bool is_frozen(std::span<const double> wealth, const Network& net,
               double ratio_threshold = kFreezeRatio);

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

enum class BinScale { Linear, Log };

struct Histogram {
  BinScale scale = BinScale::Linear;
  std::vector<double> edges;    // n_bins + 1 edges in units of w / <w>
  std::vector<double> density;  // normalized: sum density * width == 1
  std::vector<std::size_t> counts;
  std::size_t dropped_zeros = 0;  // log scale only
  double mean = 0.0;              // <w> of the input values
};

/// Histogram of v / <v>. Linear bins span [0, max]; log bins span the
/// positive range geometrically and drop exact zeros.
Histogram wealth_histogram(std::span<const double> values, BinScale scale, std::size_t n_bins);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // population variance
  double skewness = 0.0;
};

SampleMoments moments(std::span<const double> values);

// ---------------------------------------------------------------------------
// Observers for History::run
// ---------------------------------------------------------------------------

struct Trace {
  std::vector<std::size_t> ranks;
  std::vector<std::uint64_t> times;
  std::vector<double> ratio;
  std::vector<double> w2;
  std::vector<std::vector<double>> ranked;  // ranked[k][sample] for ranks[k]
};

/// Records r(t), W2(t) and the requested ranked wealths every `cadence` sweeps.
class TraceRecorder : public Observer {
 public:
  TraceRecorder(std::uint64_t cadence, std::vector<std::size_t> ranks = {});
  std::uint64_t cadence() const override { return cadence_; }
  void observe(const WealthState& state) override;
  const Trace& trace() const noexcept { return trace_; }

 private:
  std::uint64_t cadence_;
  Trace trace_;
};

/// Appends one snapshot per sweep until `capacity` snapshots are held.
class TrajectoryRecorder : public Observer {
 public:
  TrajectoryRecorder(std::size_t n_agents, std::size_t capacity);
  void observe(const WealthState& state) override;
  bool done() const override { return trajectory_.n_snapshots() >= capacity_; }
  const Trajectory& trajectory() const noexcept { return trajectory_; }

 private:
  Trajectory trajectory_;
  std::size_t capacity_;
};

/// Stops a run once r(t) <= threshold.
class CondensationStop : public Observer {
 public:
  explicit CondensationStop(double threshold = kFreezeRatio, std::uint64_t cadence = 1)
      : threshold_(threshold), cadence_(cadence) {}
  std::uint64_t cadence() const override { return cadence_; }
  void observe(const WealthState& state) override;
  bool done() const override { return stop_time_.has_value(); }
  std::optional<std::uint64_t> stop_time() const noexcept { return stop_time_; }

 private:
  double threshold_;
  std::uint64_t cadence_;
  std::optional<std::uint64_t> stop_time_;
};

/// Stops a run once the LRA set is frozen at `threshold`.
class FreezeStop : public Observer {
 public:
  FreezeStop(const Network& net, double threshold = kFreezeRatio, std::uint64_t cadence = 1)
      : net_(&net), threshold_(threshold), cadence_(cadence) {}
  std::uint64_t cadence() const override { return cadence_; }
  void observe(const WealthState& state) override;
  bool done() const override { return stop_time_.has_value(); }
  std::optional<std::uint64_t> stop_time() const noexcept { return stop_time_; }

 private:
  const Network* net_;
  double threshold_;
  std::uint64_t cadence_;
  std::optional<std::uint64_t> stop_time_;
};

struct LraCensusSample {
  std::uint64_t t = 0;
  std::size_t n_lra = 0;
  std::size_t n_type1 = 0;
  std::size_t n_type2 = 0;
};

/// LRA counts and type split every `cadence` sweeps.
class LraCensusRecorder : public Observer {
 public:
  LraCensusRecorder(const Network& net, std::uint64_t cadence, TypeSplit split = TypeSplit::GlobalMean)
      : net_(&net), cadence_(cadence), split_(split) {}
  std::uint64_t cadence() const override { return cadence_; }
  void observe(const WealthState& state) override;
  const std::vector<LraCensusSample>& samples() const noexcept { return samples_; }

 private:
  const Network* net_;
  std::uint64_t cadence_;
  TypeSplit split_;
  std::vector<LraCensusSample> samples_;
};

}  // namespace yardsale
