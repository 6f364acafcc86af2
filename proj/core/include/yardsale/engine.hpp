#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "yardsale/network.hpp"
#include "yardsale/random.hpp"

namespace yardsale {

/// Win probability p of the poorer agent and bet fraction f of its wealth.
struct ExchangeParams {
  double p;
  double f;

  /// Validates 0 <= p <= 1 and 0 < f <= 1.
  ExchangeParams(double p, double f);

  /// Instability rate; Domain error when f == 1 (ln 0).
  double theta() const;
  /// Critical probability for this f; Domain error when f == 1.
  double p_star() const;
};

struct WealthState {
  std::vector<double> wealth;
  std::uint64_t t = 0;  // sweeps applied so far

  /// Every agent holds `per_agent`, so W_T = n * per_agent.
  static WealthState even(std::size_t n, double per_agent = 1.0);

  std::size_t size() const noexcept { return wealth.size(); }
  double total() const noexcept;
  double mean() const noexcept { return total() / static_cast<double>(wealth.size()); }
};

/// Moves the stake f * poorer from loser to winner in place. Requires
/// poorer <= richer; never produces negative wealth for f <= 1.
inline void settle_bet(double& poorer, double& richer, double f, bool poorer_wins) noexcept {
  const double stake = f * poorer;
  if (poorer_wins) {
    poorer += stake;
    richer -= stake;
  } else {
    poorer -= stake;
    richer += stake;
  }
}

/// One yard-sale bet between a and b; the smaller wealth plays the poorer
/// role (a on exact ties). Returns the updated pair in input order.
std::pair<double, double> exchange_pair(double w_a, double w_b, double f, bool poorer_wins);

enum class Role { A, B };

/// Strictly smaller wealth is the poorer; exact ties go to a fair coin.
Role designate_poorer(double w_a, double w_b, Rng& rng);

enum class SweepMode {
  Permutation,  // every agent initiates once, in fresh random order
  RandomPair,   // N initiators drawn uniformly with replacement
};

/// Randomness consumed by a sweep, in draw order:
///   permutation  index(k + 1) for k = N-1 .. 1 (Fisher-Yates on 0..N-1)
///   per exchange index(degree) for the partner, coin() only on exact
///                wealth ties, then win(p) for the poorer agent.
/// RandomPair replaces the shuffle by one index(N) per exchange.
struct RngDraws {
  Rng& rng;
  std::uint64_t index(std::uint64_t n) { return uniform_index(rng, n); }
  bool coin() { return (rng() >> 63) != 0; }
  bool win(double p) { return uniform01(rng) < p; }
};

namespace detail {

template <class Draws>
inline void interact(double* w, std::size_t i, const Network& net, double p, double f,
                     Draws& draws) {
  const auto nbrs = net.neighbors(i);
  const std::size_t j = nbrs[draws.index(nbrs.size())];
  const double wi = w[i];
  const double wj = w[j];
  bool i_poorer = wi < wj;
  if (wi == wj) [[unlikely]]
    i_poorer = draws.coin();
  const bool poorer_wins = draws.win(p);
  // Branch-free settle; both outcomes are equally likely near the interface.
  const double stake = f * (i_poorer ? wi : wj);
  const double to_i = (i_poorer == poorer_wins) ? stake : -stake;
  w[i] = wi + to_i;
  w[j] = wj - to_i;
}

}  // namespace detail

/// Sequential sweep engine. Owns the permutation scratch buffer so the hot
/// loop does not allocate; one instance per concurrent history.
class Sweeper {
 public:
  explicit Sweeper(SweepMode mode = SweepMode::Permutation) : mode_(mode) {}

  SweepMode mode() const noexcept { return mode_; }

  /// One timestep. Dimension error when state and network sizes differ.
  void operator()(WealthState& state, const Network& net, const ExchangeParams& params, Rng& rng) {
    Rng local = rng;  // keeps the generator state in registers
    RngDraws draws{local};
    step(state, net, params, draws);
    rng = local;
  }

  /// Same timestep with an arbitrary draw source (see RngDraws).
  template <class Draws>
  void step(WealthState& state, const Network& net, const ExchangeParams& params, Draws& draws) {
    check_sizes(state, net);
    const std::size_t n = state.size();
    double* w = state.wealth.data();
    const double p = params.p;
    const double f = params.f;
    if (mode_ == SweepMode::Permutation) {
      order_.resize(n);
      for (std::size_t k = 0; k < n; ++k) order_[k] = static_cast<std::uint32_t>(k);
      for (std::size_t k = n - 1; k > 0; --k) std::swap(order_[k], order_[draws.index(k + 1)]);
      for (const auto i : order_) detail::interact(w, i, net, p, f, draws);
    } else {
      for (std::size_t k = 0; k < n; ++k) detail::interact(w, draws.index(n), net, p, f, draws);
    }
    ++state.t;
  }

 private:
  static void check_sizes(const WealthState& state, const Network& net);

  SweepMode mode_;
  std::vector<std::uint32_t> order_;
};

/// Convenience single sweep; allocates scratch on every call.
void sweep(WealthState& state, const Network& net, const ExchangeParams& params, Rng& rng,
           SweepMode mode = SweepMode::Permutation);

/// Sampling hook for run_history. observe() runs at t = 0 and whenever
/// t is a multiple of cadence(); a run ends early once any observer
/// reports done().
class Observer {
 public:
  virtual ~Observer() = default;
  virtual std::uint64_t cadence() const { return 1; }
  virtual void observe(const WealthState& state) = 0;
  virtual bool done() const { return false; }
};

struct RunRecord {
  WealthState final_state;
  std::uint64_t sweeps = 0;
  bool stopped_early = false;
};

/// One stochastic history: a wealth state, its private random stream
/// (seed, history) and sweep scratch.
class History {
 public:
  History(const Network& net, const ExchangeParams& params, std::uint64_t seed,
          std::uint64_t history = 0, SweepMode mode = SweepMode::Permutation);

  const WealthState& state() const noexcept { return state_; }
  const Network& network() const noexcept { return *net_; }
  const ExchangeParams& params() const noexcept { return params_; }

  void advance(std::uint64_t sweeps = 1);

  /// Sweeps up to `max_sweeps` more times, feeding observers as described
  /// on Observer. Returns true when an observer stopped the run.
  bool run(std::uint64_t max_sweeps, std::span<Observer* const> observers);

 private:
  const Network* net_;
  ExchangeParams params_;
  Rng rng_;
  Sweeper sweeper_;
  WealthState state_;
};

/// Fresh history from the even state w_i = 1, run for n_sweeps sweeps
/// (or until an observer is done). Fully determined by (seed, history).
RunRecord run_history(const Network& net, const ExchangeParams& params, std::uint64_t n_sweeps,
                      std::uint64_t seed, std::span<Observer* const> observers = {},
                      std::uint64_t history = 0, SweepMode mode = SweepMode::Permutation);

}  // namespace yardsale
