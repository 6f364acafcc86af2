#include <algorithm>
#include <cmath>
#include <vector>

#include "support.hpp"
#include "yardsale/analysis.hpp"
#include "yardsale/theory.hpp"

using namespace yardsale;

namespace {

double gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

CorrelationEstimate sampled(const std::function<double(double)>& c, std::size_t max_lag) {
  CorrelationEstimate est;
  for (std::size_t k = 0; k <= max_lag; ++k) {
    est.taus.push_back(static_cast<double>(k));
    est.c.push_back(k == 0 ? 1.0 : c(static_cast<double>(k)));
  }
  est.t_window = 10 * max_lag;
  est.c_zero = 1.0;
  return est;
}

std::vector<DivergencePoint> divergence_data(std::span<const double> ps, double amplitude, double p_c,
                                             double z, double noise, Rng* rng) {
  std::vector<DivergencePoint> pts;
  for (double p : ps) {
    double y = amplitude * std::pow(std::abs(p - p_c), -z);
    if (rng != nullptr) y *= 1.0 + noise * gaussian(*rng);
    pts.push_back({p, y});
  }
  return pts;
}

double fraction_within(const std::vector<double>& v, double centre, double tol) {
  const auto hits = std::count_if(v.begin(), v.end(), [&](double x) { return std::abs(x - centre) <= tol; });
  return static_cast<double>(hits) / static_cast<double>(v.size());
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("line fit against closed-form least squares") {
    const std::vector<double> x{0, 1, 2, 3, 4};
    const std::vector<double> y{1.0, 3.1, 4.8, 7.1, 9.0};
    const auto line = fit_line(x, y);
    // Normal equations: xbar = 2, ybar = 5, sxy = 20, sxx = 10.
    CHECK(line.slope == doctest::Approx(2.0));
    CHECK(line.intercept == doctest::Approx(1.0));
    const double ssr = 0.01 + 0.04 + 0.01;
    CHECK(line.ssr == doctest::Approx(ssr));
    CHECK(line.slope_se == doctest::Approx(std::sqrt(ssr / 3.0 / 10.0)));
    CHECK(line.intercept_se == doctest::Approx(std::sqrt(ssr / 3.0 * (1.0 / 5 + 4.0 / 10))));
    CHECK(line.r_squared == doctest::Approx(1.0 - ssr / 40.06));
    CHECK_ERROR_KIND(fit_line(std::vector<double>{1, 1}, std::vector<double>{1, 2}), ErrorKind::DegenerateInput);
    CHECK_ERROR_KIND(fit_line(std::vector<double>{1}, std::vector<double>{1}), ErrorKind::InsufficientData);
    CHECK_ERROR_KIND(fit_line(std::vector<double>{1, 2}, std::vector<double>{1}), ErrorKind::Dimension);
  }

  TEST_CASE("noiseless exponential decay round trip") {
    const auto est = sampled([](double t) { return 0.8 * std::exp(-t / 50.0); }, 300);
    const auto fit = fit_exponential_decay(est);
    CHECK(fit.value("tau0") == doctest::Approx(50.0).epsilon(1e-10));
    CHECK(fit.value("c0") == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(fit.residual < 1e-10);
    CHECK_FALSE(fit.poor_fit);
    // c(0) = 1 sits above the window; c falls below 0.05 after 50 ln 16.
    CHECK(fit.window_lo == 1.0);
    CHECK(fit.window_hi == std::floor(50.0 * std::log(16.0)));
    CHECK(fit.n_points == static_cast<std::size_t>(fit.window_hi));
    CHECK_ERROR_KIND(fit.value("nope"), ErrorKind::Index);
  }

  TEST_CASE("noisy exponential decay gives tau0 = 50 +- 2") {
    Rng rng = make_stream(404);
    std::vector<double> taus;
    for (int trial = 0; trial < 200; ++trial) {
      const auto est = sampled([&](double t) { return 0.8 * std::exp(-t / 50.0) * (1.0 + 0.01 * gaussian(rng)); }, 300);
      taus.push_back(fit_exponential_decay(est).value("tau0"));
    }
    CHECK(fraction_within(taus, 50.0, 2.0) >= 0.99);
  }

  TEST_CASE("gaussian-shaped correlation is flagged as a poor fit") {
    const auto est = sampled([](double t) { return std::exp(-(t / 50.0) * (t / 50.0)); }, 300);
    const auto fit = fit_exponential_decay(est);
    CHECK(fit.poor_fit);
  }

  TEST_CASE("decay fit needs enough usable points") {
    const auto fast = sampled([](double t) { return 0.9 * std::exp(-t / 2.0); }, 50);
    CHECK_ERROR_KIND(fit_exponential_decay(fast), ErrorKind::InsufficientData);
    const auto flat = sampled([](double) { return 0.9; }, 50);
    CHECK_ERROR_KIND(fit_exponential_decay(flat), ErrorKind::InsufficientData);
    const auto negative = sampled([](double t) { return t < 5 ? 0.9 : -0.1; }, 50);
    CHECK_ERROR_KIND(fit_exponential_decay(negative), ErrorKind::InsufficientData);
  }

  TEST_CASE("decay fit window is configurable") {
    const auto est = sampled([](double t) { return std::exp(-t / 20.0); }, 200);
    DecayFitOptions opts;
    opts.c_min = 0.2;
    opts.c_max = 0.5;
    const auto fit = fit_exponential_decay(est, opts);
    CHECK(fit.window_lo == std::ceil(20.0 * std::log(2.0)));
    CHECK(fit.window_hi == std::floor(20.0 * std::log(5.0)));
    CHECK(fit.value("tau0") == doctest::Approx(20.0).epsilon(1e-10));
  }

  TEST_CASE("noiseless divergence round trip") {
    const std::vector<double> ps{0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9};
    const auto pts = divergence_data(ps, 1.0, 0.525, 1.0, 0.0, nullptr);
    const auto fit = fit_critical_divergence(pts);
    CHECK(std::abs(fit.value("p_c") - 0.525) < 1e-4);
    CHECK(fit.value("z") == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(fit.value("A") == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fit.residual < 1e-10);
    CHECK(fit.n_points == 7);
  }

  TEST_CASE("noiseless divergence from below") {
    const std::vector<double> ps{0.1, 0.2, 0.3, 0.35, 0.4, 0.45, 0.5};
    const auto pts = divergence_data(ps, 2.0, 0.55, 1.3, 0.0, nullptr);
    DivergenceFitOptions opts;
    opts.side = Side::Below;
    const auto fit = fit_critical_divergence(pts, opts);
    CHECK(std::abs(fit.value("p_c") - 0.55) < 1e-6);
    CHECK(fit.value("z") == doctest::Approx(1.3).epsilon(1e-5));
    CHECK(fit.residual < 1e-10);
  }

  TEST_CASE("noisy divergence recovers p_c and z") {
    Rng rng = make_stream(2718);
    const double p_star = 0.525042;
    const std::vector<double> ps{0.54, 0.55, 0.56, 0.58, 0.6, 0.63, 0.66, 0.7};
    std::vector<double> pcs, zs;
    for (int trial = 0; trial < 200; ++trial) {
      const auto pts = divergence_data(ps, 3.0, p_star, 1.15, 0.02, &rng);
      const auto fit = fit_critical_divergence(pts);
      pcs.push_back(fit.value("p_c"));
      zs.push_back(fit.value("z"));
    }
    CHECK(fraction_within(pcs, 0.525, 0.003) >= 0.95);
    CHECK(fraction_within(zs, 1.15, 0.1) >= 0.95);
  }

  TEST_CASE("divergence fit is scale-equivariant") {
    Rng rng = make_stream(9);
    const std::vector<double> ps{0.56, 0.6, 0.64, 0.7, 0.78, 0.86};
    const auto pts = divergence_data(ps, 1.0, 0.53, 1.1, 0.03, &rng);
    auto scaled = pts;
    for (auto& pt : scaled) pt.y *= 37.5;
    const auto a = fit_critical_divergence(pts);
    const auto b = fit_critical_divergence(scaled);
    CHECK(b.value("p_c") == doctest::Approx(a.value("p_c")).epsilon(1e-12));
    CHECK(b.value("z") == doctest::Approx(a.value("z")).epsilon(1e-9));
    CHECK(b.value("A") == doctest::Approx(37.5 * a.value("A")).epsilon(1e-9));
  }

  TEST_CASE("divergence fit failure and input errors") {
    // Pure exponential has no power-law critical point nearby.
    std::vector<DivergencePoint> flat;
    for (double p : {0.6, 0.65, 0.7, 0.75, 0.8}) flat.push_back({p, std::exp(-p)});
    CHECK_ERROR_KIND(fit_critical_divergence(flat), ErrorKind::FitFailure);
    const std::vector<DivergencePoint> few{{0.6, 1}, {0.7, 2}, {0.8, 3}};
    CHECK_ERROR_KIND(fit_critical_divergence(few), ErrorKind::InsufficientData);
    const std::vector<DivergencePoint> bad{{0.6, 1}, {0.7, 2}, {0.8, -3}, {0.9, 1}, {1.0, 1}};
    CHECK_ERROR_KIND(fit_critical_divergence(bad), ErrorKind::InvalidParameter);
  }

  TEST_CASE("power law with known critical point") {
    const std::vector<double> ps{0.1, 0.2, 0.3, 0.4, 0.5};
    const auto pts = divergence_data(ps, 4.0, theory::p_star(0.1), 1.0, 0.0, nullptr);
    const auto fit = fit_power_law(pts, theory::p_star(0.1));
    CHECK(fit.value("z") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.value("A") == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(fit.value("r_squared") == doctest::Approx(1.0));
    CHECK(fit.residual < 1e-10);
    const std::vector<DivergencePoint> on_pc{{0.5, 1}, {0.4, 2}, {0.3, 3}};
    CHECK_ERROR_KIND(fit_power_law(on_pc, 0.5), ErrorKind::InvalidParameter);
  }

  TEST_CASE("standard errors shrink as one over root n") {
    Rng rng = make_stream(55);
    const std::vector<double> ps{0.56, 0.6, 0.64, 0.7, 0.78, 0.86};
    std::vector<double> x, ys;
    for (double p : ps) x.push_back(std::log(p - 0.525));
    // Averaging n noisy replicas per point; slope SE tracks the noise of the mean.
    auto slope_se = [&](int replicas) {
      double total = 0.0;
      for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> y;
        for (double lx : x) {
          double sum = 0.0;
          for (int r = 0; r < replicas; ++r) sum += -1.15 * lx + 0.05 * gaussian(rng);
          y.push_back(sum / replicas);
        }
        total += fit_line(x, y).slope_se;
      }
      return total / 200.0;
    };
    const double ratio = slope_se(200) / slope_se(100);
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
  }

  TEST_CASE("equilibration is not applicable in the unstable phase") {
    const auto net = make_complete(50);
    CHECK_ERROR_KIND(equilibration_length(net, ExchangeParams(0.5, 0.1), {}, 1), ErrorKind::NotApplicable);
    CHECK_ERROR_KIND(equilibration_length(net, ExchangeParams(theory::p_star(0.3), 0.3), {}, 1),
                     ErrorKind::NotApplicable);
    CHECK_ERROR_KIND(equilibration_length(net, ExchangeParams(0.9, 1.0), {}, 1), ErrorKind::NotApplicable);
  }

  TEST_CASE("deep stable point equilibrates within a few doublings") {
    const auto net = make_complete(100);
    CorrelationProbe probe;
    probe.max_lag = 50;
    probe.histories = 2;
    const auto t_eq = equilibration_length(net, ExchangeParams(0.9, 0.1), probe, 3);
    CHECK(t_eq <= 8 * 1000);
  }

  TEST_CASE("equilibration length is a doubling of the start") {
    const auto net = make_complete(100);
    CorrelationProbe probe;
    probe.max_lag = 50;
    probe.histories = 2;
    probe.start_sweeps = 300;
    for (double p : {0.9, 0.6, 0.54}) {
      const auto t_eq = equilibration_length(net, ExchangeParams(p, 0.1), probe, 3);
      CHECK(t_eq >= 600);
      CHECK(t_eq % 300 == 0);
      const auto k = t_eq / 300;
      CHECK((k & (k - 1)) == 0);
    }
  }

  TEST_CASE("equilibration cap raises non-convergence") {
    const auto net = make_complete(100);
    CorrelationProbe probe;
    probe.max_lag = 50;
    probe.tolerance = 0.0;
    probe.cap_sweeps = 4000;
    CHECK_ERROR_KIND(equilibration_length(net, ExchangeParams(0.7, 0.1), probe, 3), ErrorKind::NonConvergence);
  }
}
