#include "yardsale/observables.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

#include "yardsale/error.hpp"

namespace yardsale {

// ---------------------------------------------------------------------------
// Correlations

void Trajectory::push(std::span<const double> wealth) {
  if (wealth.size() != n_agents_)
    throw Error(ErrorKind::Dimension, "snapshot size differs from trajectory width");
  data_.insert(data_.end(), wealth.begin(), wealth.end());
}

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const noexcept {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

std::size_t fft_size(std::size_t at_least) {
  std::size_t m = 1;
  while (m < at_least) m <<= 1;
  return m;
}

}  // namespace

CorrelationEstimate correlation(const Trajectory& trajectory, std::size_t max_lag,
                                std::size_t window) {
  const std::size_t n = trajectory.n_agents();
  const std::size_t t_window = window == 0 ? 10 * max_lag : window;
  if (n == 0 || t_window == 0)
    throw Error(ErrorKind::InsufficientData, "correlation needs agents and a nonzero window");
  const std::size_t span = t_window + max_lag;
  if (trajectory.n_snapshots() < span)
    throw Error(ErrorKind::InsufficientData,
                "trajectory has " + std::to_string(trajectory.n_snapshots()) +
                    " snapshots, need " + std::to_string(span));

  const auto first = trajectory.snapshot(0);
  const double w_bar = std::accumulate(first.begin(), first.end(), 0.0) / static_cast<double>(n);

  double c_zero = 0.0;
  for (std::size_t t = 0; t < t_window; ++t) {
    for (const double w : trajectory.snapshot(t)) c_zero += (w - w_bar) * (w - w_bar);
  }
  if (!(c_zero > 0.0))
    throw Error(ErrorKind::DegenerateInput, "zero wealth fluctuations; c(tau) undefined");

  const std::size_t m = fft_size(span);
  const std::size_t bins = m / 2 + 1;
  auto real = fftw_buffer<double>(m);
  auto head = fftw_buffer<fftw_complex>(bins);
  auto full = fftw_buffer<fftw_complex>(bins);
  auto acc = fftw_buffer<fftw_complex>(bins);
  Plan forward, backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward.reset(fftw_plan_dft_r2c_1d(static_cast<int>(m), real.get(), head.get(), FFTW_ESTIMATE));
    backward.reset(fftw_plan_dft_c2r_1d(static_cast<int>(m), acc.get(), real.get(), FFTW_ESTIMATE));
  }
  std::fill_n(&acc[0][0], 2 * bins, 0.0);

  // sum_t x[t] y[t + tau] = IFFT(conj(X) Y)[tau], with x the first T samples
  // and y the first T + max_lag samples of one agent's excess wealth; no
  // wrap-around since m >= T + max_lag.
  for (std::size_t i = 0; i < n; ++i) {
    std::fill_n(real.get(), m, 0.0);
    for (std::size_t t = 0; t < t_window; ++t) real[t] = trajectory.snapshot(t)[i] - w_bar;
    fftw_execute_dft_r2c(forward.get(), real.get(), head.get());
    for (std::size_t t = t_window; t < span; ++t) real[t] = trajectory.snapshot(t)[i] - w_bar;
    fftw_execute_dft_r2c(forward.get(), real.get(), full.get());
    for (std::size_t k = 0; k < bins; ++k) {
      const std::complex<double> x(head[k][0], head[k][1]);
      const std::complex<double> y(full[k][0], full[k][1]);
      const auto prod = std::conj(x) * y;
      acc[k][0] += prod.real();
      acc[k][1] += prod.imag();
    }
  }
  fftw_execute(backward.get());

  CorrelationEstimate est;
  est.t_window = t_window;
  est.c_zero = c_zero / (static_cast<double>(n) * static_cast<double>(t_window));
  est.taus.resize(max_lag + 1);
  est.c.resize(max_lag + 1);
  const double zero_lag = real[0];
  for (std::size_t tau = 0; tau <= max_lag; ++tau) {
    est.taus[tau] = static_cast<double>(tau);
    est.c[tau] = real[tau] / zero_lag;
  }
  return est;
}

CorrelationEstimate average_correlations(std::span<const CorrelationEstimate> estimates) {
  if (estimates.empty()) throw Error(ErrorKind::InsufficientData, "no correlation estimates to average");
  CorrelationEstimate out = estimates.front();
  for (std::size_t k = 1; k < estimates.size(); ++k) {
    const auto& e = estimates[k];
    if (e.c.size() != out.c.size())
      throw Error(ErrorKind::Dimension, "correlation estimates have different lag ranges");
    for (std::size_t tau = 0; tau < out.c.size(); ++tau) out.c[tau] += e.c[tau];
    out.c_zero += e.c_zero;
  }
  const auto count = static_cast<double>(estimates.size());
  for (auto& v : out.c) v /= count;
  out.c[0] = 1.0;
  out.c_zero /= count;
  return out;
}

// ---------------------------------------------------------------------------
// Condensation measures

double condensation_ratio(std::span<const double> wealth) {
  if (wealth.size() < 2) throw Error(ErrorKind::InvalidSize, "condensation ratio needs N >= 2");
  double first = -1.0, second = -1.0;
  for (const double w : wealth) {
    if (w > first) {
      second = first;
      first = w;
    } else if (w > second) {
      second = w;
    }
  }
  if (!(first > 0.0)) throw Error(ErrorKind::DegenerateInput, "all wealths are zero");
  return second / first;
}

double w2(std::span<const double> wealth) {
  double sum = 0.0, sum_sq = 0.0;
  for (const double w : wealth) {
    sum += w;
    sum_sq += w * w;
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::DegenerateInput, "total wealth is zero");
  return sum_sq / (sum * sum);
}

std::vector<double> ranked_wealths(std::span<const double> wealth, std::span<const std::size_t> ranks) {
  const std::size_t n = wealth.size();
  std::size_t deepest = 0;
  for (const auto r : ranks) {
    if (r < 1 || r > n)
      throw Error(ErrorKind::Index, "rank " + std::to_string(r) + " outside [1, " + std::to_string(n) + "]");
    deepest = std::max(deepest, r);
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(deepest), order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return wealth[a] > wealth[b] || (wealth[a] == wealth[b] && a < b);
                    });
  std::vector<double> out;
  out.reserve(ranks.size());
  for (const auto r : ranks) out.push_back(wealth[order[r - 1]]);
  return out;
}

// ---------------------------------------------------------------------------
// Locally rich agents

namespace {

void check_dimension(std::span<const double> wealth, const Network& net) {
  if (wealth.size() != net.size())
    throw Error(ErrorKind::Dimension, "wealth has " + std::to_string(wealth.size()) +
                                          " agents but network has " + std::to_string(net.size()));
}

// Richest neighbor of i, or nullopt as soon as one neighbor is at least as rich.
std::optional<double> richest_poorer_neighbor(std::span<const double> wealth, const Network& net,
                                              std::size_t i) {
  const double wi = wealth[i];
  double richest = 0.0;
  for (const auto j : net.neighbors(i)) {
    const double wj = wealth[j];
    if (wj >= wi) return std::nullopt;
    richest = std::max(richest, wj);
  }
  return richest;
}

}  // namespace

LraReport find_lras(std::span<const double> wealth, const Network& net, TypeSplit split) {
  check_dimension(wealth, net);
  LraReport report;
  bool frozen = true;
  for (std::size_t i = 0; i < wealth.size(); ++i) {
    const auto richest = richest_poorer_neighbor(wealth, net, i);
    if (!richest) continue;
    report.lra_indices.push_back(static_cast<std::uint32_t>(i));
    report.lra_wealths.push_back(wealth[i]);
    frozen = frozen && *richest <= kFreezeRatio * wealth[i];
  }
  for (const auto i : report.lra_indices) {
    for (const auto j : net.neighbors(i)) {
      if (std::binary_search(report.lra_indices.begin(), report.lra_indices.end(), j))
        throw std::logic_error("adjacent locally rich agents " + std::to_string(i) + ", " +
                               std::to_string(j));
    }
  }
  const std::size_t count = report.lra_indices.size();
  report.rho = static_cast<double>(count) / static_cast<double>(wealth.size());
  report.frozen = count > 0 && frozen;

  double reference = 0.0;
  if (split == TypeSplit::GlobalMean) {
    reference = std::accumulate(wealth.begin(), wealth.end(), 0.0) / static_cast<double>(wealth.size());
  } else if (count > 0) {
    reference = std::accumulate(report.lra_wealths.begin(), report.lra_wealths.end(), 0.0) /
                static_cast<double>(count);
  }
  for (const double w : report.lra_wealths) {
    if (w >= reference) {
      ++report.n_type1;
    } else {
      ++report.n_type2;
    }
  }
  return report;
}

FreezeStatus freeze_status(std::span<const double> wealth, const Network& net, double ratio_threshold) {
  check_dimension(wealth, net);
  bool any = false;
  for (std::size_t i = 0; i < wealth.size(); ++i) {
    const auto richest = richest_poorer_neighbor(wealth, net, i);
    if (!richest) continue;
    if (*richest > ratio_threshold * wealth[i]) return FreezeStatus::Active;
    any = true;
  }
  return any ? FreezeStatus::Frozen : FreezeStatus::NoLra;
}

bool is_frozen(std::span<const double> wealth, const Network& net, double ratio_threshold) {
  const auto status = freeze_status(wealth, net, ratio_threshold);
  if (status == FreezeStatus::NoLra)
    throw Error(ErrorKind::NotApplicable, "no locally rich agents; freezing undefined");
  return status == FreezeStatus::Frozen;
}

// ---------------------------------------------------------------------------
// Distributions

Histogram wealth_histogram(std::span<const double> values, BinScale scale, std::size_t n_bins) {
  if (values.empty()) throw Error(ErrorKind::DegenerateInput, "histogram of no values");
  if (n_bins == 0) throw Error(ErrorKind::InvalidParameter, "histogram needs at least one bin");
  Histogram h;
  h.scale = scale;
  h.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (!(h.mean > 0.0)) throw Error(ErrorKind::DegenerateInput, "histogram values have zero mean");

  std::vector<double> x;
  x.reserve(values.size());
  for (const double v : values) {
    if (scale == BinScale::Log && v <= 0.0) {
      ++h.dropped_zeros;
      continue;
    }
    x.push_back(v / h.mean);
  }
  if (x.empty()) throw Error(ErrorKind::DegenerateInput, "no positive values for log binning");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  double lo = scale == BinScale::Log ? std::log(*lo_it) : 0.0;
  double hi = scale == BinScale::Log ? std::log(*hi_it) : *hi_it;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double step = (hi - lo) / static_cast<double>(n_bins);
  h.edges.resize(n_bins + 1);
  for (std::size_t k = 0; k <= n_bins; ++k) {
    const double e = lo + step * static_cast<double>(k);
    h.edges[k] = scale == BinScale::Log ? std::exp(e) : e;
  }
  h.counts.assign(n_bins, 0);
  for (const double v : x) {
    const double u = scale == BinScale::Log ? std::log(v) : v;
    auto k = static_cast<std::size_t>(std::floor((u - lo) / step));
    h.counts[std::min(k, n_bins - 1)] += 1;
  }
  h.density.resize(n_bins);
  const auto kept = static_cast<double>(x.size());
  for (std::size_t k = 0; k < n_bins; ++k)
    h.density[k] = static_cast<double>(h.counts[k]) / (kept * (h.edges[k + 1] - h.edges[k]));
  return h;
}

SampleMoments moments(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::DegenerateInput, "moments of no values");
  SampleMoments m;
  const auto n = static_cast<double>(values.size());
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0;
  for (const double v : values) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m.variance = m2 / n;
  m.skewness = m.variance > 0.0 ? (m3 / n) / std::pow(m.variance, 1.5) : 0.0;
  return m;
}

// ---------------------------------------------------------------------------
// Observers

TraceRecorder::TraceRecorder(std::uint64_t cadence, std::vector<std::size_t> ranks)
    : cadence_(cadence == 0 ? 1 : cadence) {
  trace_.ranks = std::move(ranks);
  trace_.ranked.resize(trace_.ranks.size());
}

void TraceRecorder::observe(const WealthState& state) {
  trace_.times.push_back(state.t);
  trace_.ratio.push_back(condensation_ratio(state.wealth));
  trace_.w2.push_back(w2(state.wealth));
  if (!trace_.ranks.empty()) {
    const auto values = ranked_wealths(state.wealth, trace_.ranks);
    for (std::size_t k = 0; k < values.size(); ++k) trace_.ranked[k].push_back(values[k]);
  }
}

TrajectoryRecorder::TrajectoryRecorder(std::size_t n_agents, std::size_t capacity)
    : trajectory_(n_agents), capacity_(capacity) {
  trajectory_.reserve(capacity);
}

void TrajectoryRecorder::observe(const WealthState& state) {
  if (trajectory_.n_snapshots() < capacity_) trajectory_.push(state.wealth);
}

void CondensationStop::observe(const WealthState& state) {
  if (!stop_time_ && condensation_ratio(state.wealth) <= threshold_) stop_time_ = state.t;
}

void FreezeStop::observe(const WealthState& state) {
  if (!stop_time_ && freeze_status(state.wealth, *net_, threshold_) == FreezeStatus::Frozen)
    stop_time_ = state.t;
}

void LraCensusRecorder::observe(const WealthState& state) {
  const auto report = find_lras(state.wealth, *net_, split_);
  samples_.push_back({state.t, report.lra_indices.size(), report.n_type1, report.n_type2});
}

}  // namespace yardsale
