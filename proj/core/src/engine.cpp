#include "yardsale/engine.hpp"

#include <numeric>
#include <string>

#include "yardsale/error.hpp"
#include "yardsale/theory.hpp"

namespace yardsale {

ExchangeParams::ExchangeParams(double p_, double f_) : p(p_), f(f_) {
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorKind::InvalidParameter, "p must lie in [0, 1], got " + std::to_string(p));
  if (!(f > 0.0 && f <= 1.0))
    throw Error(ErrorKind::InvalidParameter, "f must lie in (0, 1], got " + std::to_string(f));
}

double ExchangeParams::theta() const { return theory::theta(p, f); }
double ExchangeParams::p_star() const { return theory::p_star(f); }

WealthState WealthState::even(std::size_t n, double per_agent) {
  return WealthState{std::vector<double>(n, per_agent), 0};
}

double WealthState::total() const noexcept {
  return std::accumulate(wealth.begin(), wealth.end(), 0.0);
}

std::pair<double, double> exchange_pair(double w_a, double w_b, double f, bool poorer_wins) {
  if (w_a <= w_b) {
    settle_bet(w_a, w_b, f, poorer_wins);
  } else {
    settle_bet(w_b, w_a, f, poorer_wins);
  }
  return {w_a, w_b};
}

Role designate_poorer(double w_a, double w_b, Rng& rng) {
  if (w_a < w_b) return Role::A;
  if (w_b < w_a) return Role::B;
  return RngDraws{rng}.coin() ? Role::A : Role::B;
}

void Sweeper::check_sizes(const WealthState& state, const Network& net) {
  if (state.size() != net.size())
    throw Error(ErrorKind::Dimension, "state has " + std::to_string(state.size()) +
                                          " agents but network has " + std::to_string(net.size()));
}

void sweep(WealthState& state, const Network& net, const ExchangeParams& params, Rng& rng,
           SweepMode mode) {
  Sweeper sweeper(mode);
  sweeper(state, net, params, rng);
}

History::History(const Network& net, const ExchangeParams& params, std::uint64_t seed,
                 std::uint64_t history, SweepMode mode)
    : net_(&net),
      params_(params),
      rng_(make_stream(seed, history)),
      sweeper_(mode),
      state_(WealthState::even(net.size())) {}

void History::advance(std::uint64_t sweeps) {
  for (std::uint64_t s = 0; s < sweeps; ++s) sweeper_(state_, *net_, params_, rng_);
}

bool History::run(std::uint64_t max_sweeps, std::span<Observer* const> observers) {
  auto sample = [&]() {
    bool done = false;
    for (auto* obs : observers) {
      const auto cadence = obs->cadence() == 0 ? 1 : obs->cadence();
      if (state_.t % cadence == 0) obs->observe(state_);
      done = done || obs->done();
    }
    return done;
  };
  if (sample()) return true;
  for (std::uint64_t s = 0; s < max_sweeps; ++s) {
    sweeper_(state_, *net_, params_, rng_);
    if (!observers.empty() && sample()) return true;
  }
  return false;
}

RunRecord run_history(const Network& net, const ExchangeParams& params, std::uint64_t n_sweeps,
                      std::uint64_t seed, std::span<Observer* const> observers,
                      std::uint64_t history, SweepMode mode) {
  History h(net, params, seed, history, mode);
  const std::uint64_t start = h.state().t;
  const bool stopped = h.run(n_sweeps, observers);
  return RunRecord{h.state(), h.state().t - start, stopped};
}

}  // namespace yardsale
