#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yardsale/engine.hpp"
#include "yardsale/network.hpp"
#include "yardsale/observables.hpp"

namespace yardsale {

struct FitParam {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
};

struct FitResult {
  std::vector<FitParam> params;
  double residual = 0.0;  // sum of squared residuals in the linearized (log) space
  double window_lo = 0.0;  // range of the abscissa actually used
  double window_hi = 0.0;
  std::size_t n_points = 0;
  bool poor_fit = false;

  /// Index error when no parameter carries that name.
  double value(std::string_view name) const;
  double std_error(std::string_view name) const;
};

/// Ordinary least squares y = intercept + slope x with OLS standard errors.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
  double slope_se = 0.0;
  double ssr = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct DecayFitOptions {
  double c_min = 0.05;
  double c_max = 0.8;
  std::size_t min_points = 8;
  /// Fit flagged poor when the rms log-residual exceeds this.
  double poor_fit_rms = 0.05;
};

/// Fits c(tau) ~ c0 exp(-tau / tau0) by least squares on ln c over the
/// contiguous stretch of lags that starts where c first drops to c_max and
/// ends before c first falls below c_min (or turns non-positive).
/// Parameters "tau0" and "c0". InsufficientData below min_points.
FitResult fit_exponential_decay(const CorrelationEstimate& corr, const DecayFitOptions& options = {});

struct DivergencePoint {
  double p = 0.0;
  double y = 0.0;  // tau0 or t0, positive
};

/// Which side of the critical point the data lie on.
enum class Side { Above, Below };

struct DivergenceFitOptions {
  Side side = Side::Above;
  std::size_t grid_points = 400;
  double resolution = 1e-9;  // final p_c grid spacing
  std::size_t min_points = 5;
};

/// Fits y = A |p - p_c|^(-z). Scans p_c on a grid spanning one data range
/// beyond the data edge, linear-fitting ln y against ln|p - p_c| at each
/// candidate, then refines the grid around the best candidate down to
/// options.resolution. Parameters "p_c", "z", "A". FitFailure when the
/// coarse minimum sits at either end of the scan.
FitResult fit_critical_divergence(std::span<const DivergencePoint> points,
                                  const DivergenceFitOptions& options = {});

/// Same law with p_c known: log-log least squares for "z" and "A"; the
/// result also carries "r_squared".
FitResult fit_power_law(std::span<const DivergencePoint> points, double p_c);

struct CorrelationProbe {
  std::size_t max_lag = 100;
  std::size_t window = 0;  // 0 selects 10 * max_lag
  std::size_t histories = 1;
  double tolerance = 0.02;
  std::uint64_t start_sweeps = 0;  // 0 selects 10 N
  std::uint64_t cap_sweeps = 10'000'000;
  SweepMode mode = SweepMode::Permutation;
};

/// Mean c(tau) over `probe.histories` histories (streams 0, 1, ...) each
/// equilibrated for t_eq sweeps from the even state and then recorded for
/// window + max_lag sweeps.
CorrelationEstimate equilibrium_correlation(const Network& net, const ExchangeParams& params,
                                            std::uint64_t t_eq, const CorrelationProbe& probe,
                                            std::uint64_t seed);

/// Doubles T_eq from probe.start_sweeps until two successive c(tau)
/// estimates differ pointwise by at most probe.tolerance; returns the last
/// T_eq. NotApplicable outside the stable phase, NonConvergence past the cap.
std::uint64_t equilibration_length(const Network& net, const ExchangeParams& params,
                                   const CorrelationProbe& probe, std::uint64_t seed);

}  // namespace yardsale
