#pragma once

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "yardsale/error.hpp"

#define CHECK_ERROR_KIND(expr, expected_kind)                              \
  do {                                                                     \
    try {                                                                  \
      (void)(expr);                                                        \
      FAIL_CHECK("expected yardsale::Error from " #expr);                  \
    } catch (const yardsale::Error& caught_) {                             \
      CHECK_MESSAGE(caught_.kind() == (expected_kind), caught_.what());    \
    }                                                                      \
  } while (false)

namespace testing {

/// Draw source that replays a fixed script, for forcing sweep outcomes.
struct ScriptedDraws {
  std::deque<std::uint64_t> indices;
  std::deque<bool> coins;
  std::deque<bool> wins;

  std::uint64_t index(std::uint64_t n) {
    REQUIRE(!indices.empty());
    const auto k = indices.front();
    indices.pop_front();
    REQUIRE(k < n);
    return k;
  }
  bool coin() {
    REQUIRE(!coins.empty());
    const bool c = coins.front();
    coins.pop_front();
    return c;
  }
  bool win(double) {
    REQUIRE(!wins.empty());
    const bool w = wins.front();
    wins.pop_front();
    return w;
  }
};

inline double relative_gap(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testing
