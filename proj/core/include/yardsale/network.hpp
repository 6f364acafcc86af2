#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace yardsale {

enum class TopologyKind { Ring1d, Square2dPeriodic, ErdosRenyi, Complete };

struct Topology {
  TopologyKind kind = TopologyKind::Complete;
  double gamma = 0.0;  // requested mean degree; ErdosRenyi only

  /// "ring", "square", "er" or "complete".
  std::string label() const;
};

/// Immutable undirected simple graph over N agents, stored as compressed
/// sorted adjacency lists. The constructor rejects anything that is not
/// symmetric, loop-free, duplicate-free and connected, so every Network in
/// circulation satisfies those invariants.
class Network {
 public:
  Network(std::vector<std::vector<std::uint32_t>> adjacency, Topology topology);

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  const Topology& topology() const noexcept { return topology_; }

  std::span<const std::uint32_t> neighbors(std::size_t i) const noexcept {
    return {targets_.data() + offsets_[i], targets_.data() + offsets_[i + 1]};
  }
  std::size_t degree(std::size_t i) const noexcept { return offsets_[i + 1] - offsets_[i]; }
  std::size_t edge_count() const noexcept { return targets_.size() / 2; }
  double mean_degree() const noexcept {
    return static_cast<double>(targets_.size()) / static_cast<double>(size());
  }
  /// Link density d_l = <degree> / (N - 1).
  double link_density() const noexcept { return mean_degree() / static_cast<double>(size() - 1); }
  bool is_complete() const noexcept { return edge_count() * 2 == size() * (size() - 1); }

  bool adjacent(std::size_t i, std::size_t j) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
  Topology topology_;
};

/// Periodic 1d chain; n >= 3.
Network make_ring(std::size_t n);

/// Periodic side x side square lattice; node (x, y) is x * side + y; side >= 3.
Network make_square_lattice(std::size_t side);

/// Complete graph (full mixture); n >= 2.
Network make_complete(std::size_t n);

/// G(n, gamma / (n - 1)) conditioned on connectivity: whole graphs are redrawn
/// from successive sub-streams of `seed` until one is connected, giving up
/// after kMaxErdosRenyiAttempts. gamma == n - 1 returns the complete graph.
Network make_erdos_renyi(std::size_t n, double gamma, std::uint64_t seed);

inline constexpr int kMaxErdosRenyiAttempts = 10'000;

/// Breadth-first reachability from node 0 over raw adjacency lists.
bool is_connected(const std::vector<std::vector<std::uint32_t>>& adjacency);

/// Edge-list text: a "# n=<N> topology=<label> gamma=<g>" header followed by
/// one "i j" line per edge (0-indexed, i < j, lexicographic order).
void write_edge_list(std::ostream& out, const Network& net);

/// Reads the format above. Without a header, N is one past the largest
/// index and the topology is inferred (Complete if every pair is linked,
/// ErdosRenyi with the observed mean degree otherwise).
Network read_edge_list(std::istream& in);

}  // namespace yardsale
