#include "yardsale/network.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include "yardsale/error.hpp"
#include "yardsale/random.hpp"

namespace yardsale {

std::string Topology::label() const {
  switch (kind) {
    case TopologyKind::Ring1d: return "ring";
    case TopologyKind::Square2dPeriodic: return "square";
    case TopologyKind::ErdosRenyi: return "er";
    case TopologyKind::Complete: return "complete";
  }
  return "unknown";
}

bool is_connected(const std::vector<std::vector<std::uint32_t>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::queue<std::uint32_t> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto i = frontier.front();
    frontier.pop();
    for (const auto j : adjacency[i]) {
      if (j < n && !seen[j]) {
        seen[j] = 1;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == n;
}

Network::Network(std::vector<std::vector<std::uint32_t>> adjacency, Topology topology)
    : topology_(topology) {
  const std::size_t n = adjacency.size();
  if (n < 2) throw Error(ErrorKind::InvalidSize, "network needs at least 2 agents");

  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = adjacency[i];
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end())
      throw Error(ErrorKind::InvalidParameter, "duplicate neighbor at node " + std::to_string(i));
    for (const auto j : row) {
      if (j >= n) throw Error(ErrorKind::Index, "neighbor index out of range at node " + std::to_string(i));
      if (j == i) throw Error(ErrorKind::InvalidParameter, "self-loop at node " + std::to_string(i));
    }
    offsets_.push_back(offsets_.back() + row.size());
  }
  targets_.reserve(offsets_.back());
  for (const auto& row : adjacency) targets_.insert(targets_.end(), row.begin(), row.end());

  for (std::size_t i = 0; i < n; ++i) {
    for (const auto j : neighbors(i)) {
      if (!adjacent(j, i))
        throw Error(ErrorKind::InvalidParameter,
                    "asymmetric link " + std::to_string(i) + "->" + std::to_string(j));
    }
  }
  if (!is_connected(adjacency))
    throw Error(ErrorKind::InvalidParameter, "network is not connected");
}

bool Network::adjacent(std::size_t i, std::size_t j) const {
  const auto row = neighbors(i);
  return std::binary_search(row.begin(), row.end(), static_cast<std::uint32_t>(j));
}

Network make_ring(std::size_t n) {
  if (n < 3) throw Error(ErrorKind::InvalidSize, "ring needs n >= 3, got " + std::to_string(n));
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    adj[i] = {static_cast<std::uint32_t>((i + n - 1) % n), static_cast<std::uint32_t>((i + 1) % n)};
  }
  return Network(std::move(adj), {TopologyKind::Ring1d, 2.0});
}

Network make_square_lattice(std::size_t side) {
  if (side < 3)
    throw Error(ErrorKind::InvalidSize, "square lattice needs side >= 3, got " + std::to_string(side));
  const std::size_t n = side * side;
  std::vector<std::vector<std::uint32_t>> adj(n);
  auto index = [side](std::size_t x, std::size_t y) {
    return static_cast<std::uint32_t>((x % side) * side + (y % side));
  };
  for (std::size_t x = 0; x < side; ++x) {
    for (std::size_t y = 0; y < side; ++y) {
      adj[x * side + y] = {index(x + side - 1, y), index(x + 1, y), index(x, y + side - 1),
                           index(x, y + 1)};
    }
  }
  return Network(std::move(adj), {TopologyKind::Square2dPeriodic, 4.0});
}

namespace {

std::vector<std::vector<std::uint32_t>> complete_adjacency(std::size_t n) {
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    adj[i].reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) adj[i].push_back(static_cast<std::uint32_t>(j));
  }
  return adj;
}

}  // namespace

Network make_complete(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::InvalidSize, "complete graph needs n >= 2");
  return Network(complete_adjacency(n), {TopologyKind::Complete, static_cast<double>(n - 1)});
}

Network make_erdos_renyi(std::size_t n, double gamma, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::InvalidSize, "random graph needs n >= 2");
  const double max_degree = static_cast<double>(n - 1);
  if (!(gamma > 0.0) || gamma > max_degree)
    throw Error(ErrorKind::InvalidParameter,
                "mean degree must lie in (0, n-1], got " + std::to_string(gamma));
  const Topology topology{TopologyKind::ErdosRenyi, gamma};
  if (gamma == max_degree) return Network(complete_adjacency(n), topology);

  const double link_probability = gamma / max_degree;
  for (int attempt = 0; attempt < kMaxErdosRenyiAttempts; ++attempt) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(attempt));
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (bernoulli(rng, link_probability)) {
          adj[i].push_back(static_cast<std::uint32_t>(j));
          adj[j].push_back(static_cast<std::uint32_t>(i));
        }
      }
    }
    if (is_connected(adj)) return Network(std::move(adj), topology);
  }
  throw Error(ErrorKind::GenerationFailure,
              "no connected G(n, p) draw in " + std::to_string(kMaxErdosRenyiAttempts) +
                  " attempts (n=" + std::to_string(n) + ", gamma=" + std::to_string(gamma) + ")");
}

void write_edge_list(std::ostream& out, const Network& net) {
  out << "# n=" << net.size() << " topology=" << net.topology().label()
      << " gamma=" << net.topology().gamma << '\n';
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (const auto j : net.neighbors(i))
      if (i < j) out << i << ' ' << j << '\n';
  }
}

namespace {

TopologyKind kind_from_label(const std::string& label) {
  if (label == "ring") return TopologyKind::Ring1d;
  if (label == "square") return TopologyKind::Square2dPeriodic;
  if (label == "er") return TopologyKind::ErdosRenyi;
  if (label == "complete") return TopologyKind::Complete;
  throw Error(ErrorKind::Io, "unknown topology label '" + label + "'");
}

}  // namespace

Network read_edge_list(std::istream& in) {
  std::size_t n = 0;
  bool have_header = false;
  Topology topology;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    if (line[0] == '#') {
      std::string token;
      fields >> token;  // '#'
      while (fields >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const auto key = token.substr(0, eq);
        const auto value = token.substr(eq + 1);
        if (key == "n") {
          n = std::stoul(value);
          have_header = true;
        } else if (key == "topology") {
          topology.kind = kind_from_label(value);
        } else if (key == "gamma") {
          topology.gamma = std::stod(value);
        }
      }
      continue;
    }
    long long i = -1, j = -1;
    if (!(fields >> i >> j) || i < 0 || j < 0)
      throw Error(ErrorKind::Io, "malformed edge at line " + std::to_string(line_no));
    edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  }
  if (!have_header) {
    for (const auto& [i, j] : edges) n = std::max<std::size_t>(n, std::max(i, j) + 1);
  }
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) throw Error(ErrorKind::Index, "edge endpoint exceeds declared n");
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  if (!have_header) {
    const bool complete = n >= 2 && edges.size() * 2 == n * (n - 1);
    topology.kind = complete ? TopologyKind::Complete : TopologyKind::ErdosRenyi;
    topology.gamma = n > 0 ? 2.0 * static_cast<double>(edges.size()) / static_cast<double>(n) : 0.0;
  }
  return Network(std::move(adj), topology);
}

}  // namespace yardsale
