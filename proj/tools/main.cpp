#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "yardsale/analysis.hpp"
#include "yardsale/csv.hpp"
#include "yardsale/error.hpp"
#include "yardsale/harness.hpp"
#include "yardsale/network.hpp"
#include "yardsale/theory.hpp"

namespace fs = std::filesystem;
using namespace yardsale;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> histories;
  std::optional<std::size_t> threads;
  bool quiet = false;
};

void add_common(CLI::App* app, CommonFlags& flags, bool config_required) {
  auto* cfg = app->add_option("--config", flags.config, "Experiment JSON document");
  if (config_required) cfg->required()->check(CLI::ExistingFile);
  app->add_option("--seed", flags.seed, "Master seed (overrides the config)");
  app->add_option("--out", flags.out, "Output directory (overrides the config)");
  app->add_option("--histories", flags.histories, "Histories per grid point (overrides the config)")
      ->check(CLI::PositiveNumber);
  app->add_option("--threads", flags.threads, "Worker threads, 0 for all cores (overrides the config)");
  app->add_flag("-q,--quiet", flags.quiet, "No progress lines on stderr");
}

ExperimentConfig resolve(const CommonFlags& flags) {
  auto cfg = flags.config.empty() ? ExperimentConfig{} : load_config(flags.config);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out) cfg.output = *flags.out;
  if (flags.histories) cfg.histories = *flags.histories;
  if (flags.threads) cfg.threads = *flags.threads;
  return cfg;
}

ProgressFn progress_for(const CommonFlags& flags) {
  if (flags.quiet) return {};
  return [](const std::string& line) { std::cerr << line << '\n'; };
}

void emit(const Tables& tables, const ExperimentConfig& cfg) {
  write_tables(tables, cfg.output);
  std::ofstream(cfg.output / "config.json") << to_json(cfg).dump(2) << '\n';
  for (const auto& [name, table] : tables)
    std::cout << (cfg.output / (name + ".csv")).string() << ' ' << table.size() << " rows\n";
}

void emit_one(const std::string& name, const CsvTable& table, const std::optional<std::string>& out) {
  if (!out) {
    table.write(std::cout);
    return;
  }
  write_tables({{name, table}}, *out);
  std::cout << (fs::path(*out) / (name + ".csv")).string() << ' ' << table.size() << " rows\n";
}

// ---------------------------------------------------------------------------
// net

struct NetFlags {
  std::string kind = "ring";
  std::size_t n = 400;
  std::size_t side = 0;
  double gamma = 0.0;
  double d_l = 0.0;
  std::string in;
};

std::string net_file_name(const TopologySpec& t) {
  std::string name = t.label() + "_N" + std::to_string(t.n);
  if (t.kind == TopologyKind::ErdosRenyi) name += "_gamma" + format_number(t.nominal_gamma());
  return name + ".edges";
}

int run_net(const CommonFlags& common, const NetFlags& nf) {
  CsvTable summary({"topology", "N", "gamma", "d_l", "seed", "file", "edges", "mean_degree", "min_degree",
                    "max_degree"});
  auto describe = [&](const Network& net, const TopologySpec& spec, std::uint64_t seed, const std::string& file) {
    std::size_t lo = net.size(), hi = 0;
    for (std::size_t i = 0; i < net.size(); ++i) {
      lo = std::min(lo, net.degree(i));
      hi = std::max(hi, net.degree(i));
    }
    summary.add_row({spec.label(), std::to_string(net.size()), format_number(spec.nominal_gamma()),
                     format_number(spec.nominal_link_density()), std::to_string(seed), file,
                     std::to_string(net.edge_count()), format_number(net.mean_degree()), std::to_string(lo),
                     std::to_string(hi)});
  };

  if (!nf.in.empty()) {
    std::ifstream in(nf.in);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + nf.in);
    const Network net = read_edge_list(in);
    TopologySpec spec;
    spec.kind = net.topology().kind;
    spec.n = net.size();
    spec.gamma = net.topology().gamma;
    describe(net, spec, 0, nf.in);
    emit_one("networks", summary, common.out);
    return 0;
  }

  std::vector<TopologySpec> specs;
  std::uint64_t seed = common.seed.value_or(1);
  if (!common.config.empty()) {
    auto cfg = resolve(common);
    specs = cfg.topologies;
    seed = cfg.seed;
  } else {
    nlohmann::json t{{"kind", nf.kind}, {"n", nf.n}};
    if (nf.side > 0) t["side"] = nf.side;
    if (nf.gamma > 0.0) t["gamma"] = nf.gamma;
    if (nf.d_l > 0.0) t["d_l"] = nf.d_l;
    nlohmann::json doc{{"topologies", {t}}, {"p", {0.5}}, {"f", {0.1}}};
    auto cfg = config_from_json(doc);
    cfg.validate();
    specs = cfg.topologies;
  }
  const fs::path dir = common.out.value_or(".");
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const Network net = build_network(specs[k], network_seed(seed, k));
    std::string file;
    if (common.out) {
      fs::create_directories(dir);
      file = (dir / net_file_name(specs[k])).string();
      std::ofstream out(file);
      if (!out) throw Error(ErrorKind::Io, "cannot write " + file);
      write_edge_list(out, net);
    }
    describe(net, specs[k], seed, file);
  }
  summary.write(std::cout);
  return 0;
}

// ---------------------------------------------------------------------------
// theory

struct TheoryFlags {
  std::string table = "interface";
  std::vector<double> p{0.425};
  std::vector<double> f{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> gamma{2, 4, 10, 20, 100};
  double rho0 = 1.0;
  std::size_t n = 400;
  std::vector<std::size_t> ranks{1, 2, 3, 4, 10, 20};
  double horizon = 6.0;
  std::size_t points = 200;
};

int run_theory(const CommonFlags& common, const TheoryFlags& tf) {
  if (tf.table == "interface") {
    CsvTable t({"f", "p_star", "ln_ratio"});
    for (double f : tf.f)
      t.add_row({format_number(f), format_number(theory::p_star(f)),
                 format_number(std::log((1.0 + f) / (1.0 - f)))});
    emit_one("theory_interface", t, common.out);
  } else if (tf.table == "theta") {
    CsvTable t({"p", "f", "theta", "p_star", "t0_over_n"});
    for (double f : tf.f)
      for (double p : tf.p) {
        const double th = theory::theta(p, f);
        t.add_row({format_number(p), format_number(f), format_number(th), format_number(theory::p_star(f)),
                   th > 0.0 ? format_number(1.0 / th) : ""});
      }
    emit_one("theory_theta", t, common.out);
  } else if (tf.table == "abad") {
    CsvTable t({"gamma", "rho0", "rho"});
    for (double g : tf.gamma)
      t.add_row({format_number(g), format_number(tf.rho0), format_number(theory::abad_density(tf.rho0, g))});
    emit_one("theory_abad", t, common.out);
  } else if (tf.table == "ranked") {
    CsvTable t({"N", "p", "f", "theta", "t", "rank", "w_rel", "peak_t"});
    for (double f : tf.f)
      for (double p : tf.p) {
        const double th = theory::theta(p, f);
        if (!(th > 0.0)) throw Error(ErrorKind::Domain, "ranked wealth needs theta > 0 (p < p*(f))");
        const double t0 = theory::condensation_time_mf(tf.n, th);
        for (std::size_t s = 0; s <= tf.points; ++s) {
          const double time = tf.horizon * t0 * static_cast<double>(s) / static_cast<double>(tf.points);
          for (auto r : tf.ranks)
            t.add_row({std::to_string(tf.n), format_number(p), format_number(f), format_number(th),
                       format_number(time), std::to_string(r),
                       format_number(theory::ranked_wealth(r, time, th, tf.n, 1.0)),
                       r >= 2 ? format_number(theory::rank_peak_time(r, t0)) : ""});
        }
      }
    emit_one("theory_ranked", t, common.out);
  } else {
    throw Error(ErrorKind::InvalidParameter, "unknown theory table '" + tf.table + "'");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitFlags {
  std::string kind = "decay";
  std::string in;
  std::string y;
  std::string side = "above";
  std::optional<double> p_c;
  double c_min = 0.05;
  double c_max = 0.8;
  std::size_t min_points = 8;
};

const std::vector<std::string> kProvenance{"topology", "N", "gamma", "d_l", "p", "f", "seed", "n_histories"};

int run_fit(const CommonFlags& common, const FitFlags& ff) {
  const CsvTable data = CsvTable::load(ff.in);
  const bool per_p = ff.kind == "decay";
  std::vector<std::string> key_cols;
  for (const auto& c : kProvenance)
    if (per_p || c != "p") key_cols.push_back(c);
  for (const auto& c : key_cols) data.column(c);

  std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
  std::vector<std::vector<std::string>> order;
  for (std::size_t r = 0; r < data.size(); ++r) {
    std::vector<std::string> key;
    for (const auto& c : key_cols) key.push_back(data.cell(r, c));
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(r);
  }

  std::vector<std::string> header = kProvenance;
  std::vector<std::string> names;
  if (ff.kind == "decay")
    names = {"tau0", "c0"};
  else if (ff.kind == "critical")
    names = {"p_c", "z", "A"};
  else if (ff.kind == "power")
    names = {"z", "A", "r_squared"};
  else
    throw Error(ErrorKind::InvalidParameter, "unknown fit kind '" + ff.kind + "' (decay, critical, power)");
  for (const auto& n : names) {
    header.push_back(n);
    header.push_back(n + "_se");
  }
  for (const char* extra : {"p_c_used", "residual", "n_points", "poor_fit", "status", "message"})
    header.push_back(extra);
  CsvTable out(header);

  for (const auto& key : order) {
    const auto& rows = groups[key];
    std::vector<std::string> row;
    for (const auto& c : kProvenance) {
      if (!per_p && c == "p")
        row.push_back("");
      else
        row.push_back(data.cell(rows.front(), c));
    }
    std::optional<FitResult> fit;
    std::string status = "ok", message, p_c_used;
    try {
      if (ff.kind == "decay") {
        CorrelationEstimate corr;
        for (auto r : rows) {
          corr.taus.push_back(data.number(r, "tau"));
          corr.c.push_back(data.number(r, ff.y.empty() ? "c" : ff.y));
        }
        DecayFitOptions opts;
        opts.c_min = ff.c_min;
        opts.c_max = ff.c_max;
        opts.min_points = ff.min_points;
        fit = fit_exponential_decay(corr, opts);
      } else {
        const std::string ycol = ff.y.empty() ? (ff.kind == "critical" ? "tau0" : "t0") : ff.y;
        std::vector<DivergencePoint> pts;
        for (auto r : rows) {
          if (data.cell(r, ycol).empty()) continue;
          if (data.header().end() != std::find(data.header().begin(), data.header().end(), "status") &&
              data.cell(r, "status") != "ok")
            continue;
          pts.push_back({data.number(r, "p"), data.number(r, ycol)});
        }
        if (ff.kind == "critical") {
          DivergenceFitOptions opts;
          opts.side = ff.side == "below" ? Side::Below : Side::Above;
          fit = fit_critical_divergence(pts, opts);
        } else {
          const double p_c = ff.p_c ? *ff.p_c : data.number(rows.front(), "p_star");
          p_c_used = format_number(p_c);
          fit = fit_power_law(pts, p_c);
        }
      }
    } catch (const Error& e) {
      status = to_string(e.kind());
      message = e.what();
    }
    for (const auto& n : names) {
      row.push_back(fit ? format_number(fit->value(n)) : "");
      row.push_back(fit ? format_number(fit->std_error(n)) : "");
    }
    row.push_back(p_c_used);
    row.push_back(fit ? format_number(fit->residual) : "");
    row.push_back(fit ? std::to_string(fit->n_points) : "");
    row.push_back(fit ? (fit->poor_fit ? "1" : "0") : "");
    row.push_back(status);
    row.push_back(message);
    out.add_row(std::move(row));
  }
  emit_one("fit_" + ff.kind, out, common.out);
  return 0;
}

void print_error(std::string_view kind, std::string_view message) {
  std::cerr << nlohmann::json{{"error", std::string(kind)}, {"message", std::string(message)}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Yard-sale model simulations, fits and closed-form tables"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "yardsale 0.1.0");

  CommonFlags common;
  NetFlags nf;
  TheoryFlags tf;
  FitFlags ff;

  auto* net = app.add_subcommand("net", "Generate, export or check interaction networks");
  add_common(net, common, false);
  net->add_option("--kind", nf.kind, "ring, square, er or complete")
      ->check(CLI::IsMember({"ring", "square", "er", "complete"}));
  net->add_option("--n", nf.n, "Agents");
  net->add_option("--side", nf.side, "Square lattice side (N = side^2)");
  net->add_option("--gamma", nf.gamma, "Random graph mean degree");
  net->add_option("--d_l", nf.d_l, "Random graph link density");
  net->add_option("--in", nf.in, "Read and validate an edge list instead")->check(CLI::ExistingFile);

  struct Driver {
    const char* name;
    const char* help;
    Tables (*run)(const ExperimentConfig&, const ProgressFn&);
  };
  const Driver drivers[] = {
      {"stable", "Stable phase: tau0(p, f) and the measured critical line", drive_stable_phase},
      {"condense", "Unstable phase: condensation / freezing times", drive_condensation},
      {"lra", "Locally rich agents at freezing: density, histograms, W2", drive_lra_census},
      {"ranks", "Ranked-wealth traces with the mean-field overlay", drive_ranked_traces},
  };
  std::vector<CLI::App*> driver_apps;
  for (const auto& d : drivers) {
    auto* sub = app.add_subcommand(d.name, d.help);
    add_common(sub, common, true);
    driver_apps.push_back(sub);
  }

  auto* fit = app.add_subcommand("fit", "Fit an existing CSV table");
  add_common(fit, common, false);
  fit->add_option("--kind", ff.kind, "decay (correlation.csv), critical (tau0.csv) or power (condensation.csv)")
      ->check(CLI::IsMember({"decay", "critical", "power"}));
  fit->add_option("--in", ff.in, "Input CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--y", ff.y, "Ordinate column (default c, tau0 or t0)");
  fit->add_option("--side", ff.side, "Data side of the critical point")->check(CLI::IsMember({"above", "below"}));
  fit->add_option("--p-c", ff.p_c, "Critical point for power fits (default: p_star column)");
  fit->add_option("--c-min", ff.c_min, "Decay fit window floor");
  fit->add_option("--c-max", ff.c_max, "Decay fit window ceiling");
  fit->add_option("--min-points", ff.min_points, "Minimum points in the decay window");

  auto* th = app.add_subcommand("theory", "Tabulate closed-form predictions");
  add_common(th, common, false);
  th->add_option("--table", tf.table, "interface, theta, abad or ranked")
      ->check(CLI::IsMember({"interface", "theta", "abad", "ranked"}));
  th->add_option("--p", tf.p, "p values")->delimiter(',');
  th->add_option("--f", tf.f, "f values")->delimiter(',');
  th->add_option("--gamma", tf.gamma, "Coordination values")->delimiter(',');
  th->add_option("--rho0", tf.rho0, "Initial density for the coalescence formula");
  th->add_option("--n", tf.n, "Agents");
  th->add_option("--ranks", tf.ranks, "Ranks")->delimiter(',');
  th->add_option("--horizon", tf.horizon, "Trace length in units of N / theta");
  th->add_option("--points", tf.points, "Trace samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (net->parsed()) return run_net(common, nf);
    if (th->parsed()) return run_theory(common, tf);
    if (fit->parsed()) return run_fit(common, ff);
    for (std::size_t k = 0; k < driver_apps.size(); ++k) {
      if (!driver_apps[k]->parsed()) continue;
      auto cfg = resolve(common);
      cfg.validate();
      emit(drivers[k].run(cfg, progress_for(common)), cfg);
      return 0;
    }
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
