#pragma once

#include <cstddef>

// Closed-form results for the yard-sale model. All functions are pure and
// throw yardsale::Error(ErrorKind::Domain) outside their stated domain.
namespace yardsale::theory {

/// Instability rate: minus the mean log-multiplier of the poorer agent,
///   theta = -[p ln(1+f) + (1-p) ln(1-f)].
/// Positive in the wealth-appropriation phase (p < p*(f)), negative in the
/// wealth-sharing phase. Requires 0 <= p <= 1 and 0 < f < 1.
double theta(double p, double f);

/// Critical win probability where theta vanishes,
///   p*(f) = ln(1-f) / (ln(1-f) - ln(1+f)).
/// Lies in (1/2, 1) and tends to 1/2 as f -> 0+. Requires 0 < f < 1.
double p_star(double f);

/// Long-time mean-field wealth of the agent ranked `rank` (1 = richest):
///   W_T (1 - e^{-t theta / N}) / (1 - e^{-t theta}) e^{-t theta (R-1)/(N-1)}.
/// The normalization is only approximate at finite N (sum over ranks is not
/// exactly W_T). At t = 0 returns the even share W_T / N.
double ranked_wealth(std::size_t rank, double t, double theta, std::size_t n, double w_total);

/// Time at which rank R >= 2 peaks: t0 ln(R / (R-1)).
double rank_peak_time(std::size_t rank, double t0);

/// Mean-field condensation time scale t0 = N / theta (theta > 0).
double condensation_time_mf(std::size_t n, double theta);

/// Final density of active sites for immobile A + A -> A coalescence on a
/// Bethe lattice of coordination gamma from initial density rho0,
///   rho0 (1 + (gamma-2)/2 rho0)^(-gamma/(gamma-2)),
/// with the removable singularity at gamma = 2 replaced by rho0 e^{-rho0}.
double abad_density(double rho0, double gamma);

}  // namespace yardsale::theory
