#include "yardsale/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "yardsale/error.hpp"
#include "yardsale/theory.hpp"

namespace yardsale {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Topologies
// ---------------------------------------------------------------------------

namespace {

std::size_t square_side(std::size_t n) {
  auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n)
    throw Error(ErrorKind::InvalidSize, "square lattice needs a perfect-square N, got " + std::to_string(n));
  return side;
}

}  // namespace

double TopologySpec::nominal_gamma() const {
  switch (kind) {
    case TopologyKind::Ring1d: return 2.0;
    case TopologyKind::Square2dPeriodic: return 4.0;
    case TopologyKind::Complete: return static_cast<double>(n - 1);
    case TopologyKind::ErdosRenyi:
      return gamma > 0.0 ? gamma : link_density * static_cast<double>(n - 1);
  }
  return 0.0;
}

std::string TopologySpec::label() const { return Topology{kind, 0.0}.label(); }

Network build_network(const TopologySpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case TopologyKind::Ring1d: return make_ring(spec.n);
    case TopologyKind::Square2dPeriodic: return make_square_lattice(square_side(spec.n));
    case TopologyKind::Complete: return make_complete(spec.n);
    case TopologyKind::ErdosRenyi: return make_erdos_renyi(spec.n, spec.nominal_gamma(), seed);
  }
  throw Error(ErrorKind::InvalidParameter, "unknown topology");
}

std::uint64_t sweep_cap(const StopSpec& stop, std::size_t n, const ExchangeParams& params) {
  if (stop.cap > 0) return stop.cap;
  const double n_d = static_cast<double>(n);
  const double sweeps = params.f >= 1.0 ? stop.cap_factor * n_d : stop.cap_factor * n_d / params.theta();
  if (!(sweeps > 0.0) || !std::isfinite(sweeps))
    throw Error(ErrorKind::InvalidParameter, "sweep cap needs theta > 0 (unstable phase)");
  return static_cast<std::uint64_t>(std::ceil(sweeps));
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorKind::InvalidParameter, what); }

void reject_unknown(const json& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
  if (!obj.is_object()) bad_config(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
      bad_config("unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    bad_config(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::vector<double> read_grid(const json& value, const char* key) {
  if (value.is_number()) return {value.get<double>()};
  if (value.is_array()) {
    std::vector<double> out;
    for (const auto& v : value) {
      if (!v.is_number()) bad_config(std::string("'") + key + "' entries must be numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  if (value.is_object()) {
    reject_unknown(value, {"start", "stop", "count"}, key);
    double start = 0.0, stop = 0.0;
    std::size_t count = 0;
    read(value, "start", start);
    read(value, "stop", stop);
    read(value, "count", count);
    if (count == 0) bad_config(std::string("'") + key + "' range needs count >= 1");
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k)
      out[k] = count == 1 ? start : start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1);
    return out;
  }
  bad_config(std::string("'") + key + "' must be a number, a list or a {start, stop, count} range");
}

TopologyKind parse_kind(const std::string& s) {
  if (s == "ring") return TopologyKind::Ring1d;
  if (s == "square") return TopologyKind::Square2dPeriodic;
  if (s == "er") return TopologyKind::ErdosRenyi;
  if (s == "complete") return TopologyKind::Complete;
  bad_config("unknown topology kind '" + s + "' (ring, square, er, complete)");
}

TopologySpec parse_topology(const json& obj) {
  reject_unknown(obj, {"kind", "n", "side", "gamma", "d_l"}, "topology");
  TopologySpec spec;
  std::string kind = "complete";
  read(obj, "kind", kind);
  spec.kind = parse_kind(kind);
  read(obj, "n", spec.n);
  if (obj.contains("side")) {
    std::size_t side = 0;
    read(obj, "side", side);
    spec.n = side * side;
  }
  read(obj, "gamma", spec.gamma);
  read(obj, "d_l", spec.link_density);
  return spec;
}

json topology_json(const TopologySpec& spec) {
  json j{{"kind", spec.label()}, {"n", spec.n}};
  if (spec.kind == TopologyKind::ErdosRenyi) {
    if (spec.gamma > 0.0)
      j["gamma"] = spec.gamma;
    else
      j["d_l"] = spec.link_density;
  }
  return j;
}

const char* stop_name(StopRule rule) {
  switch (rule) {
    case StopRule::Auto: return "auto";
    case StopRule::Fixed: return "fixed";
    case StopRule::Condensed: return "condensed";
    case StopRule::Frozen: return "frozen";
  }
  return "auto";
}

StopRule parse_stop(const std::string& s) {
  for (auto rule : {StopRule::Auto, StopRule::Fixed, StopRule::Condensed, StopRule::Frozen})
    if (s == stop_name(rule)) return rule;
  bad_config("unknown stop rule '" + s + "' (auto, fixed, condensed, frozen)");
}

SweepMode parse_mode(const std::string& s) {
  if (s == "permutation") return SweepMode::Permutation;
  if (s == "random-pair") return SweepMode::RandomPair;
  bad_config("unknown sweep mode '" + s + "' (permutation, random-pair)");
}

const char* mode_name(SweepMode mode) {
  return mode == SweepMode::Permutation ? "permutation" : "random-pair";
}

TypeSplit parse_split(const std::string& s) {
  if (s == "global") return TypeSplit::GlobalMean;
  if (s == "lra") return TypeSplit::LraMean;
  bad_config("unknown type split '" + s + "' (global, lra)");
}

}  // namespace

double ExperimentConfig::p_at(std::size_t f_index, std::size_t p_index) const {
  if (!p_values.empty()) return p_values.at(p_index);
  return theory::p_star(f_values.at(f_index)) + p_offsets.at(p_index);
}

void ExperimentConfig::validate() const {
  if (topologies.empty()) bad_config("no topologies given");
  if (p_values.empty() == p_offsets.empty()) bad_config("give exactly one of a p grid or a p_offset grid");
  if (f_values.empty()) bad_config("empty f grid");
  if (histories < 1) throw Error(ErrorKind::InvalidSize, "histories must be >= 1");
  if (cadence < 1) bad_config("cadence must be >= 1");
  for (double f : f_values)
    if (!(f > 0.0 && f <= 1.0)) bad_config("f outside (0, 1]: " + format_number(f));
  for (std::size_t fi = 0; fi < f_values.size(); ++fi) {
    if (!p_offsets.empty() && f_values[fi] >= 1.0) bad_config("p_offset grids need f < 1");
    for (std::size_t pi = 0; pi < p_count(); ++pi) {
      const double p = p_at(fi, pi);
      if (!(p >= 0.0 && p <= 1.0)) bad_config("p outside [0, 1]: " + format_number(p));
    }
  }
  for (const auto& t : topologies) {
    switch (t.kind) {
      case TopologyKind::Ring1d:
        if (t.n < 3) throw Error(ErrorKind::InvalidSize, "ring needs N >= 3");
        break;
      case TopologyKind::Square2dPeriodic:
        if (square_side(t.n) < 3) throw Error(ErrorKind::InvalidSize, "square lattice needs side >= 3");
        break;
      case TopologyKind::Complete:
        if (t.n < 2) throw Error(ErrorKind::InvalidSize, "complete graph needs N >= 2");
        break;
      case TopologyKind::ErdosRenyi:
        if (t.n < 2) throw Error(ErrorKind::InvalidSize, "random graph needs N >= 2");
        if ((t.gamma > 0.0) == (t.link_density > 0.0))
          bad_config("random graph needs exactly one of gamma or d_l");
        break;
    }
  }
  if (!(stop.threshold > 0.0)) bad_config("stop threshold must be positive");
  if (stop.rule == StopRule::Fixed && stop.sweeps == 0) bad_config("fixed stop rule needs sweeps > 0");
  if (!(stop.cap_factor > 0.0)) bad_config("cap_factor must be positive");
  if (stable.probe_histories < 1) bad_config("probe_histories must be >= 1");
  if (lra.bins < 1) bad_config("histogram bins must be >= 1");
  if (ranks.ranks.empty()) bad_config("empty rank list");
  for (auto r : ranks.ranks)
    for (const auto& t : topologies)
      if (r < 1 || r > t.n) throw Error(ErrorKind::Index, "rank " + std::to_string(r) + " outside 1..N");
  if (!(ranks.horizon > 0.0)) bad_config("rank horizon must be positive");
}

ExperimentConfig config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"driver", "topologies", "topology", "p", "p_offset", "f", "histories", "seed", "threads", "output",
                  "sweep_mode", "cadence", "resample_network", "stop", "stable", "lra", "ranks"},
                 "config");
  ExperimentConfig cfg;
  read(doc, "driver", cfg.driver);
  if (doc.contains("topology")) cfg.topologies.push_back(parse_topology(doc.at("topology")));
  if (doc.contains("topologies")) {
    if (!doc.at("topologies").is_array()) bad_config("'topologies' must be a list");
    for (const auto& t : doc.at("topologies")) cfg.topologies.push_back(parse_topology(t));
  }
  if (doc.contains("p")) cfg.p_values = read_grid(doc.at("p"), "p");
  if (doc.contains("p_offset")) cfg.p_offsets = read_grid(doc.at("p_offset"), "p_offset");
  if (doc.contains("f")) cfg.f_values = read_grid(doc.at("f"), "f");
  read(doc, "histories", cfg.histories);
  read(doc, "seed", cfg.seed);
  read(doc, "threads", cfg.threads);
  std::string output = cfg.output.string();
  read(doc, "output", output);
  cfg.output = output;
  std::string mode = mode_name(cfg.mode);
  read(doc, "sweep_mode", mode);
  cfg.mode = parse_mode(mode);
  read(doc, "cadence", cfg.cadence);
  read(doc, "resample_network", cfg.resample_network);

  if (doc.contains("stop")) {
    const auto& s = doc.at("stop");
    reject_unknown(s, {"rule", "sweeps", "threshold", "cap_factor", "cap"}, "stop");
    std::string rule = stop_name(cfg.stop.rule);
    read(s, "rule", rule);
    cfg.stop.rule = parse_stop(rule);
    read(s, "sweeps", cfg.stop.sweeps);
    read(s, "threshold", cfg.stop.threshold);
    read(s, "cap_factor", cfg.stop.cap_factor);
    read(s, "cap", cfg.stop.cap);
  }
  if (doc.contains("stable")) {
    const auto& s = doc.at("stable");
    reject_unknown(s,
                   {"t_eq", "max_lag", "max_lag_cap", "window", "tolerance", "probe_histories", "fit_window",
                    "min_points", "poor_fit_rms", "grid_points", "resolution", "min_fit_points"},
                   "stable");
    auto& st = cfg.stable;
    read(s, "t_eq", st.t_eq);
    read(s, "max_lag", st.max_lag);
    read(s, "max_lag_cap", st.max_lag_cap);
    read(s, "window", st.window);
    read(s, "tolerance", st.tolerance);
    read(s, "probe_histories", st.probe_histories);
    if (s.contains("fit_window")) {
      std::vector<double> w;
      read(s, "fit_window", w);
      if (w.size() != 2 || !(w[0] < w[1])) bad_config("fit_window must be [c_min, c_max] with c_min < c_max");
      st.decay.c_min = w[0];
      st.decay.c_max = w[1];
    }
    read(s, "min_points", st.decay.min_points);
    read(s, "poor_fit_rms", st.decay.poor_fit_rms);
    read(s, "grid_points", st.divergence.grid_points);
    read(s, "resolution", st.divergence.resolution);
    read(s, "min_fit_points", st.divergence.min_points);
  }
  if (doc.contains("lra")) {
    const auto& s = doc.at("lra");
    reject_unknown(s, {"type_split", "bins", "census_cadence"}, "lra");
    std::string split = cfg.lra.split == TypeSplit::GlobalMean ? "global" : "lra";
    read(s, "type_split", split);
    cfg.lra.split = parse_split(split);
    read(s, "bins", cfg.lra.bins);
    read(s, "census_cadence", cfg.lra.census_cadence);
  }
  if (doc.contains("ranks")) {
    const auto& s = doc.at("ranks");
    reject_unknown(s, {"ranks", "sweeps", "horizon"}, "ranks");
    read(s, "ranks", cfg.ranks.ranks);
    read(s, "sweeps", cfg.ranks.sweeps);
    read(s, "horizon", cfg.ranks.horizon);
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json topologies = json::array();
  for (const auto& t : cfg.topologies) topologies.push_back(topology_json(t));
  json doc{
      {"driver", cfg.driver},
      {"topologies", topologies},
      {"f", cfg.f_values},
      {"histories", cfg.histories},
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"output", cfg.output.string()},
      {"sweep_mode", mode_name(cfg.mode)},
      {"cadence", cfg.cadence},
      {"resample_network", cfg.resample_network},
      {"stop",
       {{"rule", stop_name(cfg.stop.rule)},
        {"sweeps", cfg.stop.sweeps},
        {"threshold", cfg.stop.threshold},
        {"cap_factor", cfg.stop.cap_factor},
        {"cap", cfg.stop.cap}}},
      {"stable",
       {{"t_eq", cfg.stable.t_eq},
        {"max_lag", cfg.stable.max_lag},
        {"max_lag_cap", cfg.stable.max_lag_cap},
        {"window", cfg.stable.window},
        {"tolerance", cfg.stable.tolerance},
        {"probe_histories", cfg.stable.probe_histories},
        {"fit_window", {cfg.stable.decay.c_min, cfg.stable.decay.c_max}},
        {"min_points", cfg.stable.decay.min_points},
        {"poor_fit_rms", cfg.stable.decay.poor_fit_rms},
        {"grid_points", cfg.stable.divergence.grid_points},
        {"resolution", cfg.stable.divergence.resolution},
        {"min_fit_points", cfg.stable.divergence.min_points}}},
      {"lra",
       {{"type_split", cfg.lra.split == TypeSplit::GlobalMean ? "global" : "lra"},
        {"bins", cfg.lra.bins},
        {"census_cadence", cfg.lra.census_cadence}}},
      {"ranks", {{"ranks", cfg.ranks.ranks}, {"sweeps", cfg.ranks.sweeps}, {"horizon", cfg.ranks.horizon}}},
  };
  if (cfg.p_values.empty())
    doc["p_offset"] = cfg.p_offsets;
  else
    doc["p"] = cfg.p_values;
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidParameter, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

// ---------------------------------------------------------------------------
// Ensembles and scheduling
// ---------------------------------------------------------------------------

Ensemble summarize(std::span<const double> samples) {
  Ensemble e;
  e.count = samples.size();
  if (samples.empty()) {
    e.mean = std::numeric_limits<double>::quiet_NaN();
    e.std_error = e.mean;
    return e;
  }
  double sum = 0.0;
  for (double x : samples) sum += x;
  const auto n = static_cast<double>(samples.size());
  e.mean = sum / n;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - e.mean) * (x - e.mean);
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::size_t failed_at = count;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (k < failed_at) {
          failed_at = k;
          failure = std::current_exception();
        }
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t salt) {
  return splitmix64(splitmix64(splitmix64(seed) ^ cell) ^ salt);
}

std::uint64_t network_seed(std::uint64_t seed, std::size_t topology, std::uint64_t history) {
  return derive_seed(derive_seed(seed, topology, 0x4e4554), history);
}

void write_tables(const Tables& tables, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + directory.string() + ": " + ec.message());
  for (const auto& [name, table] : tables) table.save(directory / (name + ".csv"));
}

// ---------------------------------------------------------------------------
// Shared grid plumbing
// ---------------------------------------------------------------------------

namespace {

struct Cell {
  std::size_t topology = 0;
  std::size_t f = 0;
  std::size_t p = 0;
  std::uint64_t index = 0;
};

std::vector<Cell> grid_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  std::uint64_t index = 0;
  for (std::size_t t = 0; t < cfg.topologies.size(); ++t)
    for (std::size_t fi = 0; fi < cfg.f_values.size(); ++fi)
      for (std::size_t pi = 0; pi < cfg.p_count(); ++pi) cells.push_back({t, fi, pi, index++});
  return cells;
}

std::uint64_t network_seed(const ExperimentConfig& cfg, std::size_t topology, std::uint64_t history) {
  return yardsale::network_seed(cfg.seed, topology, history);
}

double p_star_of(double f) { return f >= 1.0 ? 1.0 : theory::p_star(f); }

double theta_of(double p, double f) {
  if (f >= 1.0) return p >= 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return theory::theta(p, f);
}

std::string num(double v) { return std::isnan(v) ? std::string() : format_number(v); }
std::string num(std::uint64_t v) { return format_number(v); }
std::string num(std::size_t v, int) { return format_number(static_cast<std::uint64_t>(v)); }

std::vector<std::string> with_provenance(std::initializer_list<std::string> extra) {
  std::vector<std::string> h{"topology", "N", "gamma", "d_l", "p", "f", "seed", "n_histories"};
  h.insert(h.end(), extra.begin(), extra.end());
  return h;
}

std::vector<std::string> provenance(const TopologySpec& t, std::optional<double> p, double f,
                                    const ExperimentConfig& cfg) {
  return {t.label(),
          num(static_cast<std::uint64_t>(t.n)),
          num(t.nominal_gamma()),
          num(t.nominal_link_density()),
          p ? num(*p) : std::string(),
          num(f),
          num(cfg.seed),
          num(static_cast<std::uint64_t>(cfg.histories))};
}

void extend(std::vector<std::string>& row, std::initializer_list<std::string> values) {
  row.insert(row.end(), values.begin(), values.end());
}

std::string fit_value(const std::optional<FitResult>& fit, std::string_view name) {
  return fit ? num(fit->value(name)) : std::string();
}

std::string fit_error(const std::optional<FitResult>& fit, std::string_view name) {
  return fit ? num(fit->std_error(name)) : std::string();
}

std::string describe(const GridPoint& gp) {
  return gp.topology.label() + " N=" + std::to_string(gp.topology.n) + " gamma=" +
         format_number(gp.topology.nominal_gamma()) + " p=" + format_number(gp.p) + " f=" + format_number(gp.f);
}

// Mean c(tau) over histories [0, histories) run in parallel.
CorrelationEstimate correlation_ensemble(const Network& net, const ExchangeParams& params, std::uint64_t t_eq,
                                         std::size_t max_lag, std::size_t window, std::size_t histories,
                                         std::uint64_t seed, SweepMode mode, std::size_t threads) {
  const std::size_t t_window = window == 0 ? 10 * max_lag : window;
  std::vector<CorrelationEstimate> estimates(histories);
  parallel_for(histories, threads, [&](std::size_t h) {
    History history(net, params, seed, h, mode);
    history.advance(t_eq);
    TrajectoryRecorder recorder(net.size(), t_window + max_lag);
    Observer* observers[] = {&recorder};
    history.run(t_window + max_lag, observers);
    estimates[h] = correlation(recorder.trajectory(), max_lag, t_window);
  });
  return average_correlations(estimates);
}

bool reaches(const CorrelationEstimate& corr, double level) {
  return std::any_of(corr.c.begin(), corr.c.end(), [&](double c) { return c < level; });
}

}  // namespace

// ---------------------------------------------------------------------------
// Stable phase
// ---------------------------------------------------------------------------

StablePhaseResult measure_stable_phase(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  StablePhaseResult result;
  const auto& st = cfg.stable;
  std::vector<Network> nets;
  for (std::size_t t = 0; t < cfg.topologies.size(); ++t)
    nets.push_back(build_network(cfg.topologies[t], network_seed(cfg, t, 0)));

  for (const auto& cell : grid_cells(cfg)) {
    const Network& net = nets[cell.topology];
    StablePoint sp;
    sp.point = {cfg.topologies[cell.topology], net.mean_degree(), cfg.p_at(cell.f, cell.p), cfg.f_values[cell.f]};
    const std::uint64_t seed = derive_seed(cfg.seed, cell.index);
    try {
      const ExchangeParams params(sp.point.p, sp.point.f);
      if (params.f >= 1.0 || params.p <= params.p_star())
        throw Error(ErrorKind::NotApplicable, "stable phase needs p > p*(f)");
      const std::size_t probe_h = std::min(st.probe_histories, cfg.histories);
      const std::uint64_t t_start = st.t_eq > 0 ? st.t_eq : 10 * net.size();

      std::size_t lag = st.max_lag > 0 ? st.max_lag : 64;
      if (st.max_lag == 0) {
        while (lag < st.max_lag_cap) {
          const auto pilot =
              correlation_ensemble(net, params, t_start, lag, st.window, probe_h, seed, cfg.mode, cfg.threads);
          if (reaches(pilot, st.decay.c_min)) break;
          lag *= 2;
        }
      }
      sp.max_lag = lag;
      if (st.t_eq > 0) {
        sp.t_eq = st.t_eq;
      } else {
        CorrelationProbe probe;
        probe.max_lag = lag;
        probe.window = st.window;
        probe.histories = probe_h;
        probe.tolerance = st.tolerance;
        probe.mode = cfg.mode;
        sp.t_eq = equilibration_length(net, params, probe, seed);
      }
      for (;;) {
        sp.correlation = correlation_ensemble(net, params, sp.t_eq, sp.max_lag, st.window, cfg.histories, seed,
                                              cfg.mode, cfg.threads);
        if (st.max_lag > 0 || reaches(sp.correlation, st.decay.c_min) || sp.max_lag >= st.max_lag_cap) break;
        sp.max_lag *= 2;
      }
      sp.fit = fit_exponential_decay(sp.correlation, st.decay);
    } catch (const Error& e) {
      sp.status = to_string(e.kind());
      sp.message = e.what();
    }
    if (progress) {
      progress("stable " + describe(sp.point) + " t_eq=" + std::to_string(sp.t_eq) +
               " max_lag=" + std::to_string(sp.max_lag) +
               (sp.fit ? " tau0=" + format_number(sp.fit->value("tau0")) : " " + sp.status));
    }
    result.points.push_back(std::move(sp));
  }

  const std::size_t np = cfg.p_count();
  for (std::size_t t = 0; t < cfg.topologies.size(); ++t) {
    for (std::size_t fi = 0; fi < cfg.f_values.size(); ++fi) {
      CriticalLinePoint line;
      line.topology = cfg.topologies[t];
      line.gamma = nets[t].mean_degree();
      line.f = cfg.f_values[fi];
      std::vector<DivergencePoint> pts;
      const std::size_t base = (t * cfg.f_values.size() + fi) * np;
      for (std::size_t pi = 0; pi < np; ++pi) {
        const auto& sp = result.points[base + pi];
        if (sp.fit) pts.push_back({sp.point.p, sp.fit->value("tau0")});
      }
      line.n_points = pts.size();
      try {
        line.fit = fit_critical_divergence(pts, st.divergence);
      } catch (const Error& e) {
        line.status = to_string(e.kind());
        line.message = e.what();
      }
      if (progress && line.fit)
        progress("critical line " + line.topology.label() + " f=" + format_number(line.f) +
                 " p_c=" + format_number(line.fit->value("p_c")) + " (p*=" + format_number(p_star_of(line.f)) + ")");
      result.lines.push_back(std::move(line));
    }
  }
  return result;
}

Tables stable_phase_tables(const StablePhaseResult& result, const ExperimentConfig& cfg) {
  CsvTable tau0(with_provenance({"mean_degree", "p_star", "t_eq", "max_lag", "window", "tau0", "tau0_se", "c0",
                                 "c0_se", "residual", "fit_lo", "fit_hi", "n_fit_points", "poor_fit", "status",
                                 "message"}));
  CsvTable corr(with_provenance({"tau", "c"}));
  for (const auto& sp : result.points) {
    const auto& gp = sp.point;
    auto row = provenance(gp.topology, gp.p, gp.f, cfg);
    const std::size_t window = cfg.stable.window == 0 ? 10 * sp.max_lag : cfg.stable.window;
    extend(row, {num(gp.gamma), num(p_star_of(gp.f)), num(sp.t_eq), num(sp.max_lag, 0), num(window, 0),
                 fit_value(sp.fit, "tau0"), fit_error(sp.fit, "tau0"), fit_value(sp.fit, "c0"),
                 fit_error(sp.fit, "c0"), sp.fit ? num(sp.fit->residual) : "",
                 sp.fit ? num(sp.fit->window_lo) : "", sp.fit ? num(sp.fit->window_hi) : "",
                 sp.fit ? num(sp.fit->n_points, 0) : "", sp.fit ? (sp.fit->poor_fit ? "1" : "0") : "", sp.status,
                 sp.message});
    tau0.add_row(std::move(row));
    for (std::size_t k = 0; k < sp.correlation.c.size(); ++k) {
      auto crow = provenance(gp.topology, gp.p, gp.f, cfg);
      extend(crow, {num(sp.correlation.taus[k]), num(sp.correlation.c[k])});
      corr.add_row(std::move(crow));
    }
  }
  CsvTable lines(with_provenance({"mean_degree", "p_star", "p_c", "p_c_se", "z", "z_se", "A", "A_se", "residual",
                                  "p_lo", "p_hi", "n_points", "status", "message"}));
  for (const auto& line : result.lines) {
    auto row = provenance(line.topology, std::nullopt, line.f, cfg);
    extend(row, {num(line.gamma), num(p_star_of(line.f)), fit_value(line.fit, "p_c"), fit_error(line.fit, "p_c"),
                 fit_value(line.fit, "z"), fit_error(line.fit, "z"), fit_value(line.fit, "A"),
                 fit_error(line.fit, "A"), line.fit ? num(line.fit->residual) : "",
                 line.fit ? num(line.fit->window_lo) : "", line.fit ? num(line.fit->window_hi) : "",
                 num(line.n_points, 0), line.status, line.message});
    lines.add_row(std::move(row));
  }
  return {{"tau0", std::move(tau0)}, {"correlation", std::move(corr)}, {"critical_line", std::move(lines)}};
}

Tables drive_stable_phase(const ExperimentConfig& cfg, const ProgressFn& progress) {
  return stable_phase_tables(measure_stable_phase(cfg, progress), cfg);
}

// ---------------------------------------------------------------------------
// Unstable phase
// ---------------------------------------------------------------------------

std::size_t UnstablePoint::timeouts() const {
  return static_cast<std::size_t>(
      std::count_if(histories.begin(), histories.end(), [](const HistoryEnd& h) { return h.timed_out; }));
}

namespace {

// Histories used for end-state statistics: those that stopped, or all of
// them when every history timed out.
template <class Get>
Ensemble end_state(const std::vector<HistoryEnd>& histories, Get get) {
  std::vector<double> values;
  const bool any_done = std::any_of(histories.begin(), histories.end(), [](const auto& h) { return !h.timed_out; });
  for (const auto& h : histories)
    if (!h.timed_out || !any_done) values.push_back(get(h));
  return summarize(values);
}

}  // namespace

Ensemble UnstablePoint::t0() const {
  std::vector<double> values;
  for (const auto& h : histories)
    if (!h.timed_out) values.push_back(static_cast<double>(h.sweeps));
  return summarize(values);
}

Ensemble UnstablePoint::rho() const {
  return end_state(histories, [](const HistoryEnd& h) { return h.lras.rho; });
}

Ensemble UnstablePoint::w2() const {
  return end_state(histories, [](const HistoryEnd& h) { return h.w2; });
}

std::vector<UnstablePoint> measure_unstable(const ExperimentConfig& cfg, bool census, const ProgressFn& progress) {
  cfg.validate();
  const bool fixed = cfg.stop.rule == StopRule::Fixed;
  if (!fixed) {
    for (std::size_t fi = 0; fi < cfg.f_values.size(); ++fi)
      for (std::size_t pi = 0; pi < cfg.p_count(); ++pi)
        if (const double p = cfg.p_at(fi, pi), f = cfg.f_values[fi]; !(p < p_star_of(f)))
          bad_config("unstable-phase driver needs p < p*(f); got p=" + format_number(p) + " f=" + format_number(f));
  }
  std::vector<std::optional<Network>> shared(cfg.topologies.size());
  auto network_for = [&](std::size_t t) -> const Network& {
    if (!shared[t]) shared[t] = build_network(cfg.topologies[t], network_seed(cfg, t, 0));
    return *shared[t];
  };

  std::vector<UnstablePoint> points;
  for (const auto& cell : grid_cells(cfg)) {
    const auto& spec = cfg.topologies[cell.topology];
    const bool resample = cfg.resample_network && spec.kind == TopologyKind::ErdosRenyi;
    const Network* common = resample ? nullptr : &network_for(cell.topology);
    UnstablePoint up;
    up.point = {spec, 0.0, cfg.p_at(cell.f, cell.p), cfg.f_values[cell.f]};
    const ExchangeParams params(up.point.p, up.point.f);
    up.cap = fixed ? cfg.stop.sweeps : sweep_cap(cfg.stop, spec.n, params);
    const std::uint64_t seed = derive_seed(cfg.seed, cell.index);
    up.histories.resize(cfg.histories);
    std::vector<double> degrees(cfg.histories);

    parallel_for(cfg.histories, cfg.threads, [&](std::size_t h) {
      std::optional<Network> own;
      if (resample) own = build_network(spec, network_seed(cfg, cell.topology, h + 1));
      const Network& net = resample ? *own : *common;
      degrees[h] = net.mean_degree();

      StopRule rule = cfg.stop.rule;
      if (rule == StopRule::Auto) rule = net.is_complete() ? StopRule::Condensed : StopRule::Frozen;
      CondensationStop condensed(cfg.stop.threshold, cfg.cadence);
      FreezeStop frozen(net, cfg.stop.threshold, cfg.cadence);
      const std::uint64_t census_cadence = census ? cfg.lra.census_cadence : 0;
      LraCensusRecorder recorder(net, std::max<std::uint64_t>(census_cadence, 1), cfg.lra.split);
      std::vector<Observer*> observers;
      if (rule == StopRule::Condensed) observers.push_back(&condensed);
      if (rule == StopRule::Frozen) observers.push_back(&frozen);
      if (census_cadence > 0) observers.push_back(&recorder);

      History history(net, params, seed, h, cfg.mode);
      const bool stopped = history.run(up.cap, observers);
      HistoryEnd& end = up.histories[h];
      const auto& state = history.state();
      end.sweeps = state.t;
      end.timed_out = !fixed && !stopped;
      end.lras = find_lras(state.wealth, net, cfg.lra.split);
      end.w2 = w2(state.wealth);
      end.ratio = condensation_ratio(state.wealth);
      end.census = recorder.samples();
    });
    up.point.gamma = summarize(degrees).mean;
    if (progress) {
      const auto t0 = up.t0();
      progress("unstable " + describe(up.point) + " t0=" + format_number(t0.mean) + " rho=" +
               format_number(up.rho().mean) + " timeouts=" + std::to_string(up.timeouts()));
    }
    points.push_back(std::move(up));
  }
  return points;
}

Tables condensation_tables(std::span<const UnstablePoint> points, const ExperimentConfig& cfg) {
  CsvTable summary(with_provenance({"mean_degree", "p_star", "theta", "distance", "cap", "t0", "t0_se",
                                    "t0_over_gamma", "t0_over_gamma_se", "t0_over_n", "n_done", "n_timeouts",
                                    "status"}));
  CsvTable per_history(with_provenance({"history", "sweeps", "timed_out"}));
  for (const auto& up : points) {
    const auto& gp = up.point;
    const auto t0 = up.t0();
    const double gamma = gp.gamma;
    auto row = provenance(gp.topology, gp.p, gp.f, cfg);
    extend(row, {num(gamma), num(p_star_of(gp.f)), num(theta_of(gp.p, gp.f)), num(p_star_of(gp.f) - gp.p),
                 num(up.cap), num(t0.mean), num(t0.std_error), num(t0.mean / gamma), num(t0.std_error / gamma),
                 num(t0.mean / static_cast<double>(gp.topology.n)), num(t0.count, 0), num(up.timeouts(), 0),
                 up.timeouts() > 0 ? "timeout" : "ok"});
    summary.add_row(std::move(row));
    for (std::size_t h = 0; h < up.histories.size(); ++h) {
      auto hrow = provenance(gp.topology, gp.p, gp.f, cfg);
      extend(hrow, {num(h, 0), num(up.histories[h].sweeps), up.histories[h].timed_out ? "1" : "0"});
      per_history.add_row(std::move(hrow));
    }
  }

  // Divergence of t0 towards p* at each (topology, f).
  CsvTable fits(with_provenance({"p_star", "z", "z_se", "A", "r_squared", "p_c_free", "p_c_free_se", "z_free",
                                 "z_free_se", "n_points", "status", "message"}));
  std::map<std::pair<std::string, double>, std::vector<const UnstablePoint*>> groups;
  std::vector<std::pair<std::string, double>> order;
  for (const auto& up : points) {
    const auto key = std::make_pair(up.point.topology.label() + "/" + std::to_string(up.point.topology.n) + "/" +
                                        format_number(up.point.topology.nominal_gamma()),
                                    up.point.f);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&up);
  }
  for (const auto& key : order) {
    const auto& members = groups[key];
    const auto& gp = members.front()->point;
    std::vector<DivergencePoint> pts;
    for (const auto* up : members) {
      const auto t0 = up->t0();
      if (t0.count > 0 && up->timeouts() == 0) pts.push_back({up->point.p, t0.mean});
    }
    auto row = provenance(gp.topology, std::nullopt, gp.f, cfg);
    std::optional<FitResult> fixed_fit, free_fit;
    std::string status = "ok", message;
    try {
      fixed_fit = fit_power_law(pts, p_star_of(gp.f));
      DivergenceFitOptions opts = cfg.stable.divergence;
      opts.side = Side::Below;
      free_fit = fit_critical_divergence(pts, opts);
    } catch (const Error& e) {
      status = to_string(e.kind());
      message = e.what();
    }
    extend(row, {num(p_star_of(gp.f)), fit_value(fixed_fit, "z"), fit_error(fixed_fit, "z"),
                 fit_value(fixed_fit, "A"), fit_value(fixed_fit, "r_squared"), fit_value(free_fit, "p_c"),
                 fit_error(free_fit, "p_c"), fit_value(free_fit, "z"), fit_error(free_fit, "z"),
                 num(pts.size(), 0), status, message});
    fits.add_row(std::move(row));
  }
  return {{"condensation", std::move(summary)},
          {"condensation_histories", std::move(per_history)},
          {"condensation_fit", std::move(fits)}};
}

Tables lra_tables(std::span<const UnstablePoint> points, const ExperimentConfig& cfg) {
  CsvTable density(with_provenance({"mean_degree", "link_density", "p_star", "distance", "rho", "rho_se",
                                    "abad_rho", "n_lra", "n_type1", "n_type2", "type1_fraction", "w2", "w2_se",
                                    "inverse_w2", "t0", "t0_se", "lra_wealth_mean", "lra_wealth_skewness",
                                    "n_timeouts", "status"}));
  CsvTable histograms(with_provenance({"scale", "bin", "lo", "hi", "density", "count", "dropped_zeros"}));
  CsvTable census(with_provenance({"t", "n_lra", "n_type1", "n_type2", "n_running"}));

  for (const auto& up : points) {
    const auto& gp = up.point;
    const bool any_done = up.timeouts() < up.histories.size();
    std::vector<double> pooled;
    for (const auto& h : up.histories)
      if (!h.timed_out || !any_done) pooled.insert(pooled.end(), h.lras.lra_wealths.begin(), h.lras.lra_wealths.end());
    auto mean_of = [&](auto get) { return end_state(up.histories, get).mean; };
    const double n_lra = mean_of([](const HistoryEnd& h) { return static_cast<double>(h.lras.lra_indices.size()); });
    const double type1 = mean_of([](const HistoryEnd& h) { return static_cast<double>(h.lras.n_type1); });
    const double type2 = mean_of([](const HistoryEnd& h) { return static_cast<double>(h.lras.n_type2); });
    const auto rho = up.rho();
    const auto w2e = up.w2();
    const auto t0 = up.t0();
    const double gamma = gp.topology.nominal_gamma();
    const double abad = gamma >= 2.0 ? theory::abad_density(1.0, gamma) : std::numeric_limits<double>::quiet_NaN();
    const auto mom = pooled.empty() ? SampleMoments{std::numeric_limits<double>::quiet_NaN(), 0.0,
                                                    std::numeric_limits<double>::quiet_NaN()}
                                    : moments(pooled);
    auto row = provenance(gp.topology, gp.p, gp.f, cfg);
    extend(row, {num(gp.gamma), num(gp.gamma / static_cast<double>(gp.topology.n - 1)), num(p_star_of(gp.f)),
                 num(p_star_of(gp.f) - gp.p), num(rho.mean), num(rho.std_error), num(abad), num(n_lra), num(type1),
                 num(type2), num(n_lra > 0.0 ? type1 / n_lra : std::numeric_limits<double>::quiet_NaN()),
                 num(w2e.mean), num(w2e.std_error), num(1.0 / w2e.mean), num(t0.mean), num(t0.std_error),
                 num(mom.mean), num(mom.skewness), num(up.timeouts(), 0), up.timeouts() > 0 ? "timeout" : "ok"});
    density.add_row(std::move(row));

    for (auto scale : {BinScale::Linear, BinScale::Log}) {
      if (pooled.empty()) break;
      Histogram hist;
      try {
        hist = wealth_histogram(pooled, scale, cfg.lra.bins);
      } catch (const Error&) {
        continue;
      }
      for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        auto hrow = provenance(gp.topology, gp.p, gp.f, cfg);
        extend(hrow, {scale == BinScale::Linear ? "linear" : "log", num(b, 0), num(hist.edges[b]),
                      num(hist.edges[b + 1]), num(hist.density[b]), num(hist.counts[b], 0),
                      num(hist.dropped_zeros, 0)});
        histograms.add_row(std::move(hrow));
      }
    }

    // Type counts against time; a finished history holds its last census.
    std::size_t longest = 0;
    for (const auto& h : up.histories) longest = std::max(longest, h.census.size());
    for (std::size_t s = 0; s < longest; ++s) {
      double n = 0, t1 = 0, t2 = 0;
      std::size_t running = 0;
      std::uint64_t t = 0;
      for (const auto& h : up.histories) {
        if (h.census.empty()) continue;
        const auto& c = h.census[std::min(s, h.census.size() - 1)];
        if (s < h.census.size()) {
          ++running;
          t = c.t;
        }
        n += static_cast<double>(c.n_lra);
        t1 += static_cast<double>(c.n_type1);
        t2 += static_cast<double>(c.n_type2);
      }
      const auto count = static_cast<double>(up.histories.size());
      auto crow = provenance(gp.topology, gp.p, gp.f, cfg);
      extend(crow, {num(t), num(n / count), num(t1 / count), num(t2 / count), num(running, 0)});
      census.add_row(std::move(crow));
    }
  }

  // W2 against link density over random graphs sharing (N, p, f).
  CsvTable w2fit(with_provenance({"slope", "slope_se", "intercept", "intercept_se", "r_squared", "d_l_lo", "d_l_hi",
                                  "n_points", "status", "message"}));
  std::vector<std::tuple<std::size_t, double, double>> keys;
  for (const auto& up : points) {
    if (up.point.topology.kind != TopologyKind::ErdosRenyi) continue;
    const auto key = std::make_tuple(up.point.topology.n, up.point.p, up.point.f);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [n, p, f] : keys) {
    std::vector<double> x, y;
    TopologySpec label;
    for (const auto& up : points) {
      if (up.point.topology.kind != TopologyKind::ErdosRenyi || up.point.topology.n != n || up.point.p != p ||
          up.point.f != f)
        continue;
      label = up.point.topology;
      x.push_back(up.point.gamma / static_cast<double>(n - 1));
      y.push_back(up.w2().mean);
    }
    auto row = provenance(label, p, f, cfg);
    row[2].clear();
    row[3].clear();
    std::string status = "ok", message;
    std::optional<LineFit> line;
    try {
      line = fit_line(x, y);
    } catch (const Error& e) {
      status = to_string(e.kind());
      message = e.what();
    }
    extend(row, {line ? num(line->slope) : "", line ? num(line->slope_se) : "", line ? num(line->intercept) : "",
                 line ? num(line->intercept_se) : "", line ? num(line->r_squared) : "",
                 num(*std::min_element(x.begin(), x.end())), num(*std::max_element(x.begin(), x.end())),
                 num(x.size(), 0), status, message});
    w2fit.add_row(std::move(row));
  }

  Tables tables{{"lra_density", std::move(density)}, {"lra_histogram", std::move(histograms)}};
  if (census.size() > 0) tables.emplace_back("lra_census", std::move(census));
  if (w2fit.size() > 0) tables.emplace_back("w2_fit", std::move(w2fit));
  return tables;
}

Tables drive_condensation(const ExperimentConfig& cfg, const ProgressFn& progress) {
  const auto points = measure_unstable(cfg, false, progress);
  return condensation_tables(points, cfg);
}

Tables drive_lra_census(const ExperimentConfig& cfg, const ProgressFn& progress) {
  const auto points = measure_unstable(cfg, true, progress);
  auto tables = lra_tables(points, cfg);
  auto cond = condensation_tables(points, cfg);
  tables.push_back(std::move(cond.front()));
  return tables;
}

// ---------------------------------------------------------------------------
// Ranked traces
// ---------------------------------------------------------------------------

std::uint64_t RankedTraces::peak_time(std::size_t k) const {
  const auto& series = relative.at(k);
  std::size_t best = 0;
  for (std::size_t s = 1; s < series.size(); ++s)
    if (series[s].mean > series[best].mean) best = s;
  return times.at(best);
}

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
  Ensemble finish(std::size_t n) const {
    Ensemble e;
    e.count = n;
    const auto nd = static_cast<double>(n);
    e.mean = sum / nd;
    if (n > 1) e.std_error = std::sqrt(std::max(0.0, sum_sq - sum * sum / nd) / (nd - 1.0) / nd);
    return e;
  }
};

}  // namespace

std::vector<RankedTraces> measure_ranked_traces(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  std::vector<RankedTraces> out;
  for (const auto& cell : grid_cells(cfg)) {
    const auto& spec = cfg.topologies[cell.topology];
    const Network net = build_network(spec, network_seed(cfg, cell.topology, 0));
    const ExchangeParams params(cfg.p_at(cell.f, cell.p), cfg.f_values[cell.f]);
    RankedTraces rt;
    rt.point = {spec, net.mean_degree(), params.p, params.f};
    rt.ranks = cfg.ranks.ranks;
    const double n = static_cast<double>(net.size());
    if (cfg.ranks.sweeps > 0) {
      rt.sweeps = cfg.ranks.sweeps;
    } else {
      const double th = theta_of(params.p, params.f);
      if (!(th > 0.0) || !std::isfinite(th))
        bad_config("ranked traces need ranks.sweeps when theta is not finite and positive");
      rt.sweeps = static_cast<std::uint64_t>(std::ceil(cfg.ranks.horizon * n / th));
    }
    const std::uint64_t seed = derive_seed(cfg.seed, cell.index);
    const std::size_t n_ranks = rt.ranks.size();
    const std::size_t n_samples = rt.sweeps / cfg.cadence + 1;
    std::vector<std::vector<Moments>> rel(n_ranks, std::vector<Moments>(n_samples));
    std::vector<Moments> ratio(n_samples), w2m(n_samples);

    // Batches keep memory bounded; reduction runs in history order.
    const std::size_t batch = std::max<std::size_t>(cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads, 1) * 2;
    for (std::size_t first = 0; first < cfg.histories; first += batch) {
      const std::size_t count = std::min(batch, cfg.histories - first);
      std::vector<Trace> traces(count);
      parallel_for(count, cfg.threads, [&](std::size_t k) {
        TraceRecorder recorder(cfg.cadence, rt.ranks);
        Observer* observers[] = {&recorder};
        History history(net, params, seed, first + k, cfg.mode);
        history.run(rt.sweeps, observers);
        traces[k] = recorder.trace();
      });
      for (const auto& tr : traces) {
        if (rt.times.empty()) rt.times = tr.times;
        for (std::size_t s = 0; s < n_samples && s < tr.times.size(); ++s) {
          for (std::size_t r = 0; r < n_ranks; ++r) rel[r][s].add(tr.ranked[r][s] / n);
          ratio[s].add(tr.ratio[s]);
          w2m[s].add(tr.w2[s]);
        }
      }
    }
    rt.relative.assign(n_ranks, {});
    for (std::size_t r = 0; r < n_ranks; ++r)
      for (std::size_t s = 0; s < n_samples; ++s) rt.relative[r].push_back(rel[r][s].finish(cfg.histories));
    for (std::size_t s = 0; s < n_samples; ++s) {
      rt.ratio.push_back(ratio[s].finish(cfg.histories));
      rt.w2.push_back(w2m[s].finish(cfg.histories));
    }
    if (net.is_complete() && params.f < 1.0 && params.theta() > 0.0) {
      const double th = params.theta();
      rt.theory.assign(n_ranks, {});
      for (std::size_t r = 0; r < n_ranks; ++r)
        for (auto t : rt.times)
          rt.theory[r].push_back(theory::ranked_wealth(rt.ranks[r], static_cast<double>(t), th, net.size(), 1.0));
    }
    if (progress) {
      std::string msg = "ranks " + describe(rt.point);
      for (std::size_t r = 0; r < n_ranks; ++r)
        msg += " R" + std::to_string(rt.ranks[r]) + "@" + std::to_string(rt.peak_time(r));
      progress(msg);
    }
    out.push_back(std::move(rt));
  }
  return out;
}

Tables ranked_trace_tables(std::span<const RankedTraces> traces, const ExperimentConfig& cfg) {
  CsvTable series(with_provenance({"t", "rank", "w_rel", "w_rel_se", "theory"}));
  CsvTable summary(with_provenance({"t", "ratio", "ratio_se", "w2", "w2_se"}));
  CsvTable peaks(with_provenance({"rank", "peak_t", "theory_peak_t", "peak_ratio", "peak_w_rel", "final_w_rel"}));
  for (const auto& rt : traces) {
    const auto& gp = rt.point;
    for (std::size_t r = 0; r < rt.ranks.size(); ++r) {
      for (std::size_t s = 0; s < rt.times.size(); ++s) {
        auto row = provenance(gp.topology, gp.p, gp.f, cfg);
        extend(row, {num(rt.times[s]), num(rt.ranks[r], 0), num(rt.relative[r][s].mean),
                     num(rt.relative[r][s].std_error), rt.theory.empty() ? "" : num(rt.theory[r][s])});
        series.add_row(std::move(row));
      }
    }
    for (std::size_t s = 0; s < rt.times.size(); ++s) {
      auto row = provenance(gp.topology, gp.p, gp.f, cfg);
      extend(row, {num(rt.times[s]), num(rt.ratio[s].mean), num(rt.ratio[s].std_error), num(rt.w2[s].mean),
                   num(rt.w2[s].std_error)});
      summary.add_row(std::move(row));
    }
    const double th = theta_of(gp.p, gp.f);
    for (std::size_t r = 0; r < rt.ranks.size(); ++r) {
      const auto peak = rt.peak_time(r);
      double expected = std::numeric_limits<double>::quiet_NaN();
      if (rt.ranks[r] >= 2 && th > 0.0 && std::isfinite(th))
        expected = theory::rank_peak_time(rt.ranks[r], static_cast<double>(gp.topology.n) / th);
      std::size_t at = 0;
      while (at + 1 < rt.times.size() && rt.times[at] != peak) ++at;
      auto row = provenance(gp.topology, gp.p, gp.f, cfg);
      extend(row, {num(rt.ranks[r], 0), num(peak), num(expected), num(static_cast<double>(peak) / expected),
                   num(rt.relative[r][at].mean), num(rt.relative[r].back().mean)});
      peaks.add_row(std::move(row));
    }
  }
  return {{"ranked_traces", std::move(series)}, {"ranked_summary", std::move(summary)},
          {"ranked_peaks", std::move(peaks)}};
}

Tables drive_ranked_traces(const ExperimentConfig& cfg, const ProgressFn& progress) {
  const auto traces = measure_ranked_traces(cfg, progress);
  return ranked_trace_tables(traces, cfg);
}

}  // namespace yardsale
