#include "yardsale/theory.hpp"

#include <cmath>
#include <string>

#include "yardsale/error.hpp"

namespace yardsale::theory {

namespace {

[[noreturn]] void domain(const std::string& what) { throw Error(ErrorKind::Domain, what); }

void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) domain("bet fraction must lie in (0, 1), got " + std::to_string(f));
}

}  // namespace

double theta(double p, double f) {
  if (!(p >= 0.0 && p <= 1.0)) domain("probability must lie in [0, 1], got " + std::to_string(p));
  check_fraction(f);
  return -(p * std::log1p(f) + (1.0 - p) * std::log1p(-f));
}

double p_star(double f) {
  check_fraction(f);
  const double lose = std::log1p(-f);
  const double win = std::log1p(f);
  return lose / (lose - win);
}

double ranked_wealth(std::size_t rank, double t, double theta, std::size_t n, double w_total) {
  if (n < 2) domain("ranked wealth needs n >= 2");
  if (rank < 1 || rank > n) domain("rank must lie in [1, n]");
  if (!(t >= 0.0)) domain("time must be nonnegative");
  if (!(theta > 0.0)) domain("ranked-wealth law holds only for theta > 0");
  const auto nd = static_cast<double>(n);
  if (t == 0.0) return w_total / nd;
  const double x = t * theta;
  const double prefactor = std::expm1(-x / nd) / std::expm1(-x);
  return w_total * prefactor * std::exp(-x * static_cast<double>(rank - 1) / (nd - 1.0));
}

double rank_peak_time(std::size_t rank, double t0) {
  if (rank < 2) domain("rank 1 never peaks; need rank >= 2");
  const auto r = static_cast<double>(rank);
  return t0 * std::log(r / (r - 1.0));
}

double condensation_time_mf(std::size_t n, double theta) {
  if (!(theta > 0.0)) domain("condensation time needs theta > 0");
  return static_cast<double>(n) / theta;
}

double abad_density(double rho0, double gamma) {
  if (!(rho0 > 0.0 && rho0 <= 1.0)) domain("initial density must lie in (0, 1]");
  if (!(gamma >= 2.0)) domain("coordination must be >= 2");
  if (gamma == 2.0) return rho0 * std::exp(-rho0);
  const double excess = gamma - 2.0;
  return rho0 * std::exp(-gamma / excess * std::log1p(0.5 * excess * rho0));
}

}  // namespace yardsale::theory
