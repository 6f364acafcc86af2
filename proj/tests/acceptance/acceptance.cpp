// One PASS/FAIL line per acceptance criterion. Experiment criteria read
// their grids from configs/acceptance/*.json.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "yardsale/analysis.hpp"
#include "yardsale/error.hpp"
#include "yardsale/harness.hpp"
#include "yardsale/theory.hpp"

using namespace yardsale;
namespace fs = std::filesystem;

namespace {

struct Options {
  fs::path configs = YARDSALE_ACCEPTANCE_CONFIGS;
  std::size_t threads = 0;
  fs::path out;
  bool verbose = false;
};

/// Collects sub-checks; the criterion passes only if all of them do.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) failed_ = true;
    lines_.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
  }
  void note(const std::string& what) { lines_.push_back("  .    " + what); }
  bool passed() const { return !failed_ && !lines_.empty(); }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  bool failed_ = false;
  std::vector<std::string> lines_;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

ExperimentConfig load(const Options& opt, const std::string& name) {
  auto cfg = load_config(opt.configs / (name + ".json"));
  cfg.threads = opt.threads;
  return cfg;
}

ProgressFn progress_for(const Options& opt) {
  if (!opt.verbose) return {};
  return [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };
}

void save(const Options& opt, const std::string& name, const Tables& tables) {
  if (!opt.out.empty()) write_tables(tables, opt.out / name);
}

double gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

void critical_line(const Options& opt, Verdict& v) {
  v.check(std::abs(theory::p_star(0.1) - 0.525042) < 5e-7, "p*(0.1) = " + fmt(theory::p_star(0.1), 9) + " vs 0.525042");
  v.check(std::abs(theory::p_star(0.6) - 0.660964) < 5e-7, "p*(0.6) = " + fmt(theory::p_star(0.6), 9) + " vs 0.660964");
  for (const char* name : {"interface_mf", "interface_ring"}) {
    const auto cfg = load(opt, name);
    const auto result = measure_stable_phase(cfg, progress_for(opt));
    save(opt, name, stable_phase_tables(result, cfg));
    for (const auto& sp : result.points)
      if (sp.status != "ok") v.note(sp.point.topology.label() + " p=" + fmt(sp.point.p, 6) + " f=" + fmt(sp.point.f) + ": " + sp.message);
    for (const auto& line : result.lines) {
      const double ps = theory::p_star(line.f);
      const std::string where = line.topology.label() + " N=" + std::to_string(line.topology.n) + " f=" + fmt(line.f);
      if (!line.fit) {
        v.check(false, where + ": no critical-line fit (" + line.status + ": " + line.message + ")");
        continue;
      }
      const double pc = line.fit->value("p_c");
      v.check(std::abs(pc - ps) <= 0.01, where + ": p_c = " + fmt(pc, 6) + " +- " + fmt(line.fit->std_error("p_c"), 2) +
                                              ", p* = " + fmt(ps, 6) + ", |diff| = " + fmt(std::abs(pc - ps), 2) +
                                              " (<= 0.01), z = " + fmt(line.fit->value("z"), 3));
    }
  }
}

std::vector<DivergencePoint> t0_series(const std::vector<UnstablePoint>& points, TopologyKind kind, std::size_t n,
                                       double f, bool per_gamma) {
  std::vector<DivergencePoint> out;
  for (const auto& up : points) {
    if (up.point.topology.kind != kind || up.point.topology.n != n || up.point.f != f) continue;
    const auto t0 = up.t0();
    if (t0.count == 0) continue;
    out.push_back({up.point.p, per_gamma ? t0.mean / up.point.topology.nominal_gamma() : t0.mean});
  }
  return out;
}

void report_timeouts(const std::vector<UnstablePoint>& points, Verdict& v) {
  std::size_t timeouts = 0, total = 0;
  for (const auto& up : points) {
    timeouts += up.timeouts();
    total += up.histories.size();
  }
  v.check(timeouts == 0, std::to_string(timeouts) + " of " + std::to_string(total) + " histories hit the sweep cap");
}

void mf_condensation(const Options& opt, Verdict& v) {
  const auto cfg = load(opt, "condensation_mf");
  const auto points = measure_unstable(cfg, false, progress_for(opt));
  save(opt, "condensation_mf", condensation_tables(points, cfg));
  report_timeouts(points, v);
  const double f = cfg.f_values.at(0);
  const double ps = theory::p_star(f);
  std::map<std::size_t, std::vector<DivergencePoint>> by_n;
  for (const auto& spec : cfg.topologies) {
    auto series = t0_series(points, TopologyKind::Complete, spec.n, f, false);
    const auto fit = fit_power_law(series, ps);
    const double z = fit.value("z");
    v.check(std::abs(z - 1.0) <= 0.15, "MF N=" + std::to_string(spec.n) + ": z = " + fmt(z, 4) + " +- " +
                                           fmt(fit.std_error("z"), 2) + " (1.00 +- 0.15), R^2 = " +
                                           fmt(fit.value("r_squared"), 5));
    by_n[spec.n] = std::move(series);
  }
  if (by_n.size() >= 2) {
    const auto& [n_a, a] = *by_n.begin();
    const auto& [n_b, b] = *by_n.rbegin();
    double worst = 0.0;
    for (const auto& pa : a)
      for (const auto& pb : b)
        if (pa.p == pb.p) {
          const double x = pa.y / static_cast<double>(n_a), y = pb.y / static_cast<double>(n_b);
          worst = std::max(worst, std::abs(x - y) / (0.5 * (x + y)));
          v.note("p=" + fmt(pa.p) + ": t0/N = " + fmt(x) + " (N=" + std::to_string(n_a) + "), " + fmt(y) +
                 " (N=" + std::to_string(n_b) + ")");
        }
    v.check(worst <= 0.15, "t0/N collapse: worst relative gap " + fmt(worst, 3) + " (<= 0.15)");
  } else {
    v.check(false, "collapse needs two system sizes");
  }
}

void lattice_condensation(const Options& opt, Verdict& v) {
  const auto cfg = load(opt, "condensation_lattice");
  const auto points = measure_unstable(cfg, false, progress_for(opt));
  save(opt, "condensation_lattice", condensation_tables(points, cfg));
  report_timeouts(points, v);
  for (const auto& spec : cfg.topologies) {
    for (double f : cfg.f_values) {
      const auto series = t0_series(points, spec.kind, spec.n, f, true);
      const auto fit = fit_power_law(series, theory::p_star(f));
      const double z = fit.value("z");
      v.check(std::abs(z - 1.15) <= 0.20, spec.label() + " N=" + std::to_string(spec.n) + " f=" + fmt(f) +
                                              ": t0/gamma exponent z = " + fmt(z, 4) + " +- " +
                                              fmt(fit.std_error("z"), 2) + " (1.15 +- 0.20), R^2 = " +
                                              fmt(fit.value("r_squared"), 4));
    }
  }
}

void lra_density(const Options& opt, Verdict& v) {
  const auto cfg = load(opt, "lra_density");
  const auto points = measure_unstable(cfg, false, progress_for(opt));
  save(opt, "lra_density", lra_tables(points, cfg));
  report_timeouts(points, v);
  std::map<std::pair<int, double>, std::vector<double>> ring_rhos;
  for (const auto& up : points) {
    const auto& gp = up.point;
    const double rho = up.rho().mean;
    const std::string where = gp.topology.label() + " f=" + fmt(gp.f) + " p=" + fmt(gp.p);
    if (gp.p > theory::p_star(gp.f) - 0.05 + 1e-12) {
      v.note(where + " lies above p* - 0.05; skipped");
      continue;
    }
    if (gp.topology.kind == TopologyKind::Ring1d) {
      v.check(std::abs(rho - 0.40) <= 0.05, where + ": rho = " + fmt(rho) + " +- " + fmt(up.rho().std_error, 2) +
                                                " (0.40 +- 0.05)");
      ring_rhos[{static_cast<int>(gp.topology.n), gp.f}].push_back(rho);
    } else if (gp.topology.kind == TopologyKind::Square2dPeriodic) {
      v.check(rho > 0.25 && rho < 0.35, where + ": rho = " + fmt(rho) + " +- " + fmt(up.rho().std_error, 2) +
                                            " (in (0.25, 0.35))");
    }
  }
  for (const auto& [key, rhos] : ring_rhos) {
    const auto [lo, hi] = std::minmax_element(rhos.begin(), rhos.end());
    v.check(*hi - *lo < 0.05, "ring f=" + fmt(key.second) + ": spread over p = " + fmt(*hi - *lo, 3) + " (< 0.05)");
  }
}

void abad(const Options& opt, Verdict& v) {
  const auto base_cfg = load(opt, "abad_coalescence");
  const auto base = measure_unstable(base_cfg, false, progress_for(opt));
  const auto other_cfg = load(opt, "abad_exchange");
  const auto other = measure_unstable(other_cfg, false, progress_for(opt));
  save(opt, "abad_coalescence", lra_tables(base, base_cfg));
  save(opt, "abad_exchange", lra_tables(other, other_cfg));
  report_timeouts(base, v);
  report_timeouts(other, v);
  for (const auto& up : base) {
    const auto& spec = up.point.topology;
    const double rho = up.rho().mean;
    const double expected = theory::abad_density(1.0, spec.nominal_gamma());
    const std::string where = "ER N=" + std::to_string(spec.n) + " gamma=" + fmt(spec.nominal_gamma());
    v.check(relative(rho, expected) <= 0.25, where + " (f=1, p=1/2): rho = " + fmt(rho) + ", predicted = " + fmt(expected) +
                                                 ", rel = " + fmt(relative(rho, expected), 3) + " (<= 0.25)");
    for (const auto& alt : other) {
      if (alt.point.topology.n != spec.n || alt.point.topology.nominal_gamma() != spec.nominal_gamma()) continue;
      const double r = alt.rho().mean;
      v.check(relative(r, rho) < 0.25, where + " (f=" + fmt(alt.point.f) + ", p=" + fmt(alt.point.p) +
                                           "): rho = " + fmt(r) + ", change vs coalescence = " +
                                           fmt(relative(r, rho), 3) + " (< 0.25)");
    }
  }
}

void w2_freezing(const Options& opt, Verdict& v) {
  const auto cfg = load(opt, "w2_freezing");
  const auto points = measure_unstable(cfg, false, progress_for(opt));
  save(opt, "w2_freezing", lra_tables(points, cfg));
  report_timeouts(points, v);
  for (std::size_t fi = 0; fi < cfg.f_values.size(); ++fi) {
    const double f = cfg.f_values[fi];
    for (std::size_t pi = 0; pi < cfg.p_count(); ++pi) {
      const double p = cfg.p_at(fi, pi);
      std::vector<double> x, y;
      for (const auto& up : points) {
        if (up.point.p != p || up.point.f != f) continue;
        x.push_back(up.point.gamma / static_cast<double>(up.point.topology.n - 1));
        y.push_back(up.w2().mean);
        v.note("p=" + fmt(p) + " d_l=" + fmt(x.back(), 3) + ": W2 = " + fmt(y.back()) +
               ", 1/N_LRA = " + fmt(1.0 / (up.rho().mean * static_cast<double>(up.point.topology.n))));
      }
      const auto line = fit_line(x, y);
      const std::string where = "f=" + fmt(f) + " p=" + fmt(p);
      v.check(line.r_squared >= 0.9, where + ": R^2 = " + fmt(line.r_squared, 4) + " (>= 0.9)");
      v.check(line.slope >= 0.5 && line.slope <= 2.0,
              where + ": slope = " + fmt(line.slope, 4) + " +- " + fmt(line.slope_se, 2) + " (within factor 2 of 1)");
    }
  }
}

void ranked(const Options& opt, Verdict& v) {
  const auto cfg = load(opt, "ranked_traces");
  const auto traces = measure_ranked_traces(cfg, progress_for(opt));
  save(opt, "ranked_traces", ranked_trace_tables(traces, cfg));
  for (const auto& rt : traces) {
    const double t0 = theory::condensation_time_mf(rt.point.topology.n, theory::theta(rt.point.p, rt.point.f));
    for (std::size_t k = 0; k < rt.ranks.size(); ++k) {
      const std::size_t r = rt.ranks[k];
      if (r == 1) {
        const double last = rt.relative[k].back().mean;
        v.check(last >= 0.99, "rank 1 reaches " + fmt(last, 5) + " W_T at t = " + std::to_string(rt.times.back()) +
                                  " (>= 0.99)");
        continue;
      }
      const double expected = theory::rank_peak_time(r, t0);
      const double peak = static_cast<double>(rt.peak_time(k));
      const std::string line = "rank " + std::to_string(r) + ": peak at t = " + fmt(peak, 6) + ", t0 ln(R/(R-1)) = " +
                               fmt(expected, 6) + ", ratio = " + fmt(peak / expected, 3);
      if (r <= 4)
        v.check(relative(peak, expected) <= 0.20, line + " (within 20%)");
      else
        v.note(line);
    }
  }
}

// Property suite -------------------------------------------------------------

/// Checks every sampled state: LRA set independent, W2 inside [1/N, 1].
class PropertyObserver : public Observer {
 public:
  explicit PropertyObserver(const Network& net) : net_(&net) {}
  void observe(const WealthState& state) override {
    ++samples;
    const auto report = find_lras(state.wealth, *net_);
    for (const auto i : report.lra_indices)
      for (const auto j : net_->neighbors(i))
        if (std::binary_search(report.lra_indices.begin(), report.lra_indices.end(), j)) ++adjacent_pairs;
    const double m = w2(state.wealth);
    const double n = static_cast<double>(state.size());
    if (!(m >= (1.0 / n) * (1.0 - 1e-12) && m <= 1.0 + 1e-12)) ++w2_violations;
  }
  std::size_t samples = 0;
  std::size_t adjacent_pairs = 0;
  std::size_t w2_violations = 0;

 private:
  const Network* net_;
};

void replay_sweep(std::vector<double>& w, const Network& net, double p, double f, Rng& rng) {
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t k = w.size() - 1; k > 0; --k) std::swap(order[k], order[uniform_index(rng, k + 1)]);
  for (const std::size_t i : order) {
    const auto nbrs = net.neighbors(i);
    const std::size_t j = nbrs[uniform_index(rng, nbrs.size())];
    const Role poorer = designate_poorer(w[i], w[j], rng);
    const bool wins = uniform01(rng) < p;
    if (poorer == Role::A) {
      std::tie(w[i], w[j]) = exchange_pair(w[i], w[j], f, wins);
    } else {
      std::tie(w[j], w[i]) = exchange_pair(w[j], w[i], f, wins);
    }
  }
}

void properties(const Options&, Verdict& v) {
  // Conservation over 10^6 exchanges on several graphs and phases.
  struct Case {
    std::string label;
    Network net;
    double p, f;
  };
  std::vector<Case> cases;
  cases.push_back({"ring N=400 (0.6, 0.1)", make_ring(400), 0.6, 0.1});
  cases.push_back({"complete N=400 (0.425, 0.1)", make_complete(400), 0.425, 0.1});
  cases.push_back({"square N=400 (0.3, 0.5)", make_square_lattice(20), 0.3, 0.5});
  cases.push_back({"ER N=400 gamma=10 (0.0, 1.0)", make_erdos_renyi(400, 10.0, 1), 0.0, 1.0});
  double worst_drift = 0.0;
  std::size_t negatives = 0, samples = 0, adjacent = 0, w2_bad = 0;
  for (auto& c : cases) {
    PropertyObserver obs(c.net);
    Observer* list[] = {&obs};
    const std::uint64_t sweeps = 1'000'000 / c.net.size();
    const auto rec = run_history(c.net, ExchangeParams(c.p, c.f), sweeps, 8, list);
    const double drift = std::abs(rec.final_state.total() - static_cast<double>(c.net.size())) /
                         static_cast<double>(c.net.size());
    worst_drift = std::max(worst_drift, drift);
    negatives += static_cast<std::size_t>(
        std::count_if(rec.final_state.wealth.begin(), rec.final_state.wealth.end(), [](double w) { return w < 0.0; }));
    samples += obs.samples;
    adjacent += obs.adjacent_pairs;
    w2_bad += obs.w2_violations;
  }
  v.check(worst_drift <= 1e-9, "conservation: worst relative drift over 10^6 exchanges = " + fmt(worst_drift, 3));
  v.check(negatives == 0, "nonnegativity: " + std::to_string(negatives) + " negative wealths");
  v.check(adjacent == 0, "LRA independence: " + std::to_string(adjacent) + " adjacent LRA pairs in " +
                             std::to_string(samples) + " censuses");
  v.check(w2_bad == 0, "W2 in [1/N, 1]: " + std::to_string(w2_bad) + " violations in " + std::to_string(samples) +
                           " samples");

  // c(0) = 1 on simulated equilibrium trajectories.
  {
    const auto net = make_ring(100);
    CorrelationProbe probe;
    probe.max_lag = 30;
    probe.histories = 3;
    const auto est = equilibrium_correlation(net, ExchangeParams(0.7, 0.2), 2000, probe, 4);
    v.check(est.c.at(0) == 1.0, "c(0) = " + fmt(est.c.at(0), 17));
  }

  // theta(p*(f), f) = 0 on 10^3 f values.
  double worst_theta = 0.0;
  for (int k = 1; k <= 1000; ++k) {
    const double f = k / 1001.0;
    worst_theta = std::max(worst_theta, std::abs(theory::theta(theory::p_star(f), f)));
  }
  v.check(worst_theta <= 1e-12, "interface identity: max |theta(p*(f), f)| over 10^3 f = " + fmt(worst_theta, 3));

  // Coalescence: positive agents never increase, checked against a replay.
  std::size_t mismatches = 0, increases = 0, steps = 0;
  for (std::size_t n : {8, 20, 50}) {
    for (const auto& net : {make_ring(n), make_complete(n), make_square_lattice(n == 8 ? 3 : (n == 20 ? 4 : 7))}) {
      const std::size_t agents = net.size();
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        History h(net, ExchangeParams(0.5, 1.0), seed, 1);
        Rng rng = make_stream(seed, 1);
        std::vector<double> ref(agents, 1.0);
        std::size_t positive = agents;
        for (int t = 0; t < 500; ++t) {
          h.advance();
          replay_sweep(ref, net, 0.5, 1.0, rng);
          ++steps;
          if (h.state().wealth != ref) ++mismatches;
          const auto now = static_cast<std::size_t>(
              std::count_if(ref.begin(), ref.end(), [](double w) { return w > 0.0; }));
          if (now > positive) ++increases;
          positive = now;
        }
      }
    }
  }
  v.check(mismatches == 0 && increases == 0,
          "coalescence: " + std::to_string(steps) + " sweeps replayed, " + std::to_string(mismatches) +
              " mismatches, " + std::to_string(increases) + " increases of the positive-agent count");
}

// Fitter oracles ---------------------------------------------------------------

void fitters(const Options&, Verdict& v) {
  CorrelationEstimate exact;
  for (int k = 0; k <= 300; ++k) {
    exact.taus.push_back(k);
    exact.c.push_back(k == 0 ? 1.0 : 0.8 * std::exp(-k / 50.0));
  }
  const auto decay = fit_exponential_decay(exact);
  v.check(decay.residual < 1e-10 && std::abs(decay.value("tau0") - 50.0) < 1e-8,
          "noiseless decay: tau0 = " + fmt(decay.value("tau0"), 12) + ", residual = " + fmt(decay.residual, 3));

  std::vector<DivergencePoint> exact_div;
  for (double p = 0.6; p < 0.9 + 1e-9; p += 0.05) exact_div.push_back({p, 1.0 / (p - 0.525)});
  const auto div = fit_critical_divergence(exact_div);
  v.check(div.residual < 1e-10 && std::abs(div.value("p_c") - 0.525) < 1e-4 && std::abs(div.value("z") - 1.0) < 1e-4,
          "noiseless divergence: p_c = " + fmt(div.value("p_c"), 9) + ", z = " + fmt(div.value("z"), 9) +
              ", residual = " + fmt(div.residual, 3));

  Rng rng = make_stream(909);
  const int trials = 500;
  int decay_hits = 0;
  for (int t = 0; t < trials; ++t) {
    CorrelationEstimate noisy = exact;
    for (std::size_t k = 1; k < noisy.c.size(); ++k) noisy.c[k] *= 1.0 + 0.01 * gaussian(rng);
    decay_hits += std::abs(fit_exponential_decay(noisy).value("tau0") - 50.0) <= 2.0;
  }
  v.check(decay_hits >= 0.95 * trials, "1% noise decay: tau0 within 50 +- 2 in " + std::to_string(decay_hits) + "/" +
                                            std::to_string(trials) + " trials (>= 95%)");

  const std::vector<double> ps{0.54, 0.55, 0.56, 0.58, 0.6, 0.63, 0.66, 0.7};
  const double p_c = 0.525042;
  int pc_hits = 0, z_hits = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<DivergencePoint> pts;
    for (double p : ps) pts.push_back({p, 3.0 * std::pow(p - p_c, -1.15) * (1.0 + 0.02 * gaussian(rng))});
    const auto fit = fit_critical_divergence(pts);
    pc_hits += std::abs(fit.value("p_c") - p_c) <= 0.003;
    z_hits += std::abs(fit.value("z") - 1.15) <= 0.1;
  }
  v.check(pc_hits >= 0.95 * trials, "2% noise divergence: p_c within 0.525042 +- 0.003 in " + std::to_string(pc_hits) +
                                        "/" + std::to_string(trials) + " trials (>= 95%)");
  v.check(z_hits >= 0.95 * trials, "2% noise divergence: z within 1.15 +- 0.1 in " + std::to_string(z_hits) + "/" +
                                       std::to_string(trials) + " trials (>= 95%)");
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(const Options&, Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "critical line p_c(f) on MF and ring", critical_line},
      {2, "MF condensation time scaling and size collapse", mf_condensation},
      {3, "1d/2d condensation exponent of t0/gamma", lattice_condensation},
      {4, "LRA density on ring and square lattice", lra_density},
      {5, "LRA density on random graphs vs coalescence prediction", abad},
      {6, "W2 at freezing vs link density", w2_freezing},
      {7, "ranked-wealth peak times", ranked},
      {8, "property suite", properties},
      {9, "fitter oracles", fitters},
  };

  CLI::App app{"Acceptance checks; prints one PASS/FAIL line per criterion"};
  Options opt;
  std::vector<int> selected;
  app.add_option("--criterion,-c", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--configs", opt.configs, "Directory of acceptance configs");
  app.add_option("--threads", opt.threads, "Worker threads (0: hardware concurrency)");
  app.add_option("--out", opt.out, "Write each experiment's CSV tables below this directory");
  app.add_flag("--verbose,-v", opt.verbose, "Progress on stderr");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (const auto& c : criteria) selected.push_back(c.id);

  bool all = true;
  for (const int id : selected) {
    const auto& c = criteria.at(static_cast<std::size_t>(id - 1));
    Verdict v;
    std::string error;
    try {
      c.run(opt, v);
    } catch (const yardsale::Error& e) {
      error = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      error = std::string("unexpected: ") + e.what();
    }
    if (!error.empty()) v.check(false, error);
    for (const auto& line : v.lines()) std::printf("%s\n", line.c_str());
    std::printf("criterion %d %s: %s\n", c.id, v.passed() ? "PASS" : "FAIL", c.title);
    std::fflush(stdout);
    all = all && v.passed();
  }
  return all ? 0 : 1;
}
