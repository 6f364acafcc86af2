#include "yardsale/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "yardsale/error.hpp"

namespace yardsale {

double FitResult::value(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return p.value;
  throw Error(ErrorKind::Index, "fit has no parameter '" + std::string(name) + "'");
}

double FitResult::std_error(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return p.std_error;
  throw Error(ErrorKind::Index, "fit has no parameter '" + std::string(name) + "'");
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw Error(ErrorKind::Dimension, "x and y differ in length");
  if (n < 2) throw Error(ErrorKind::InsufficientData, "line fit needs two points");
  const auto nd = static_cast<double>(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= nd;
  my /= nd;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::DegenerateInput, "line fit needs distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.ssr += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - fit.ssr / syy : 1.0;
  if (n > 2) {
    const double s2 = fit.ssr / (nd - 2.0);
    fit.slope_se = std::sqrt(s2 / sxx);
    fit.intercept_se = std::sqrt(s2 * (1.0 / nd + mx * mx / sxx));
  }
  return fit;
}

FitResult fit_exponential_decay(const CorrelationEstimate& corr, const DecayFitOptions& options) {
  std::vector<double> taus, logs;
  std::size_t k = 0;
  const std::size_t n = std::min(corr.taus.size(), corr.c.size());
  while (k < n && corr.c[k] > options.c_max) ++k;
  for (; k < n; ++k) {
    const double c = corr.c[k];
    if (!(c >= options.c_min) || !(c > 0.0)) break;
    taus.push_back(corr.taus[k]);
    logs.push_back(std::log(c));
  }
  if (taus.size() < options.min_points || taus.size() < 2)
    throw Error(ErrorKind::InsufficientData,
                "only " + std::to_string(taus.size()) + " correlation points inside the fit window");
  const auto line = fit_line(taus, logs);
  if (!(line.slope < 0.0)) throw Error(ErrorKind::FitFailure, "correlation does not decay in the fit window");

  FitResult result;
  const double tau0 = -1.0 / line.slope;
  const double c0 = std::exp(line.intercept);
  result.params = {{"tau0", tau0, line.slope_se / (line.slope * line.slope)},
                   {"c0", c0, c0 * line.intercept_se}};
  result.residual = line.ssr;
  result.window_lo = taus.front();
  result.window_hi = taus.back();
  result.n_points = taus.size();
  result.poor_fit = std::sqrt(line.ssr / static_cast<double>(taus.size())) > options.poor_fit_rms;
  return result;
}

namespace {

struct Profile {
  double p_c;
  LineFit line;
};

Profile profile_at(std::span<const DivergencePoint> points, double p_c, Side side,
                   std::vector<double>& x, std::vector<double>& y) {
  x.clear();
  y.clear();
  for (const auto& pt : points) {
    x.push_back(std::log(side == Side::Above ? pt.p - p_c : p_c - pt.p));
    y.push_back(std::log(pt.y));
  }
  return {p_c, fit_line(x, y)};
}

}  // namespace

FitResult fit_critical_divergence(std::span<const DivergencePoint> points,
                                  const DivergenceFitOptions& options) {
  if (points.size() < std::max<std::size_t>(options.min_points, 3))
    throw Error(ErrorKind::InsufficientData, "divergence fit needs at least " +
                                                 std::to_string(options.min_points) + " points");
  double p_min = std::numeric_limits<double>::infinity();
  double p_max = -p_min;
  for (const auto& pt : points) {
    if (!(pt.y > 0.0)) throw Error(ErrorKind::InvalidParameter, "divergence data must be positive");
    p_min = std::min(p_min, pt.p);
    p_max = std::max(p_max, pt.p);
  }
  const double span = p_max - p_min;
  if (!(span > 0.0)) throw Error(ErrorKind::DegenerateInput, "divergence data need distinct p values");

  // Candidates run from one data span beyond the edge up to (not onto) it.
  const bool above = options.side == Side::Above;
  const double edge = above ? p_min : p_max;
  const double direction = above ? -1.0 : 1.0;
  const double near_gap = span * 1e-6;
  double lo = near_gap, hi = span;  // distances from the edge
  std::size_t count = std::max<std::size_t>(options.grid_points, 5);

  std::vector<double> x, y;
  Profile best{};
  bool first_level = true;
  for (;;) {
    const double step = (hi - lo) / static_cast<double>(count - 1);
    std::size_t best_k = 0;
    double best_ssr = std::numeric_limits<double>::infinity();
    std::vector<Profile> level;
    level.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double gap = lo + step * static_cast<double>(k);
      level.push_back(profile_at(points, edge + direction * gap, options.side, x, y));
      if (level.back().line.ssr < best_ssr) {
        best_ssr = level.back().line.ssr;
        best_k = k;
      }
    }
    if (first_level && (best_k == 0 || best_k + 1 == count))
      throw Error(ErrorKind::FitFailure, "no interior minimum when scanning the critical point");
    first_level = false;
    best = level[best_k];
    if (step <= options.resolution) break;
    const double centre = lo + step * static_cast<double>(best_k);
    lo = std::max(near_gap * 1e-3, centre - step);
    hi = centre + step;
    count = 21;
  }

  FitResult result;
  const double amplitude = std::exp(best.line.intercept);
  // Curvature of the residual profile gives the p_c uncertainty.
  double pc_se = 0.0;
  const std::size_t n = points.size();
  if (n > 3 && best.line.ssr > 0.0) {
    const double gap = std::abs(best.p_c - edge);
    const double h = std::max(gap * 1e-3, 1e-9);
    const double s_minus = profile_at(points, best.p_c - h, options.side, x, y).line.ssr;
    const double s_plus = profile_at(points, best.p_c + h, options.side, x, y).line.ssr;
    const double curvature = (s_plus - 2.0 * best.line.ssr + s_minus) / (h * h);
    if (curvature > 0.0) {
      const double s2 = best.line.ssr / static_cast<double>(n - 3);
      pc_se = std::sqrt(2.0 * s2 / curvature);
    }
  }
  result.params = {{"p_c", best.p_c, pc_se},
                   {"z", -best.line.slope, best.line.slope_se},
                   {"A", amplitude, amplitude * best.line.intercept_se}};
  result.residual = best.line.ssr;
  result.window_lo = p_min;
  result.window_hi = p_max;
  result.n_points = n;
  return result;
}

FitResult fit_power_law(std::span<const DivergencePoint> points, double p_c) {
  if (points.size() < 3) throw Error(ErrorKind::InsufficientData, "power-law fit needs 3 points");
  std::vector<double> x, y;
  double p_min = std::numeric_limits<double>::infinity(), p_max = -p_min;
  for (const auto& pt : points) {
    const double distance = std::abs(pt.p - p_c);
    if (!(distance > 0.0) || !(pt.y > 0.0))
      throw Error(ErrorKind::InvalidParameter, "power-law data must be positive and off the critical point");
    x.push_back(std::log(distance));
    y.push_back(std::log(pt.y));
    p_min = std::min(p_min, pt.p);
    p_max = std::max(p_max, pt.p);
  }
  const auto line = fit_line(x, y);
  FitResult result;
  const double amplitude = std::exp(line.intercept);
  result.params = {{"z", -line.slope, line.slope_se},
                   {"A", amplitude, amplitude * line.intercept_se},
                   {"r_squared", line.r_squared, 0.0}};
  result.residual = line.ssr;
  result.window_lo = p_min;
  result.window_hi = p_max;
  result.n_points = points.size();
  return result;
}

CorrelationEstimate equilibrium_correlation(const Network& net, const ExchangeParams& params,
                                            std::uint64_t t_eq, const CorrelationProbe& probe,
                                            std::uint64_t seed) {
  const std::size_t window = probe.window == 0 ? 10 * probe.max_lag : probe.window;
  const std::size_t length = window + probe.max_lag;
  std::vector<CorrelationEstimate> estimates;
  estimates.reserve(probe.histories);
  for (std::size_t h = 0; h < std::max<std::size_t>(probe.histories, 1); ++h) {
    History history(net, params, seed, h, probe.mode);
    history.advance(t_eq);
    TrajectoryRecorder recorder(net.size(), length);
    Observer* observers[] = {&recorder};
    history.run(length, observers);
    estimates.push_back(correlation(recorder.trajectory(), probe.max_lag, window));
  }
  return average_correlations(estimates);
}

std::uint64_t equilibration_length(const Network& net, const ExchangeParams& params,
                                   const CorrelationProbe& probe, std::uint64_t seed) {
  if (params.f >= 1.0 || params.p <= params.p_star())
    throw Error(ErrorKind::NotApplicable, "equilibration is defined only in the stable phase p > p*(f)");
  std::uint64_t t_eq = probe.start_sweeps == 0 ? 10 * net.size() : probe.start_sweeps;
  auto previous = equilibrium_correlation(net, params, t_eq, probe, seed);
  for (;;) {
    t_eq *= 2;
    if (t_eq > probe.cap_sweeps)
      throw Error(ErrorKind::NonConvergence, "c(tau) still depends on T_eq at the sweep cap");
    auto current = equilibrium_correlation(net, params, t_eq, probe, seed);
    double worst = 0.0;
    for (std::size_t k = 0; k < current.c.size(); ++k)
      worst = std::max(worst, std::abs(current.c[k] - previous.c[k]));
    if (worst <= probe.tolerance) return t_eq;
    previous = std::move(current);
  }
}

}  // namespace yardsale
