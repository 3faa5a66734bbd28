// qst: command-line front end for spin-chain state-transfer experiments.
//
//   qst spectrum    --N 15 --n 3 --J0 0.01
//   qst scan        --spec chain.json --tmax 2e5 --format csv --out scan.csv
//   qst independent --nlist 1,2,3,4 --grid 101
//   qst montecarlo  --N 8 --n 2 --J0 0.01 --time 62743.9 --samples 100000 --seed 7
//
// Every option can also come from a JSON file given with --config; keys are
// the long option names without dashes and flags on the command line win.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 statistical validation failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qst/dynmap.h"
#include "qst/errors.h"
#include "qst/fidelity.h"
#include "qst/oracle.h"
#include "qst/protocol.h"

namespace {

using nlohmann::json;
using namespace qst;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitStatistical = 4;
constexpr double kMaxAbsZ = 5.0;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string spec_path;
  int N = 0;
  int n = 0;
  double J0 = 0.01;
  double Js = 1.0;
  std::string engineer;
  double tmax = 0.0;
  int grid = 0;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  std::string labeling = "translation";
  double time = 0.0;
  std::string map;
  std::string mode;
  std::string nlist = "1,2,3,4,5,6";
  bool align_phase = false;
  int threads = 0;
};

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string subset_label(const std::vector<int>& s) {
  std::string out = "f_";
  for (int x : s) out += std::to_string(x);
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError(std::string(what) + ": '" + text + "' is not a comma-separated integer list");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

struct ChainOptions {
  CLI::Option* spec = nullptr;
  CLI::Option* N = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* Js = nullptr;
  CLI::Option* engineer = nullptr;
};

ChainOptions add_chain_options(CLI::App* app, Options& o) {
  ChainOptions c;
  c.spec = app->add_option("--spec", o.spec_path, "chain spec JSON file");
  c.N = app->add_option("--N", o.N, "number of sites (inline chain)");
  c.n = app->add_option("--n", o.n, "sender/receiver block size");
  app->add_option("--J0", o.J0, "weak coupling at the block edges (inline chain)");
  c.Js = app->add_option("--Js", o.Js, "intra-block coupling (inline chain)");
  c.engineer = app->add_option("--engineer", o.engineer, "k,s: set intra-block couplings to cos(k pi/(n_w+1))/cos(s pi/5)");
  return c;
}

// Applies J_s to the intra-sender and intra-receiver bonds.
void apply_block_coupling(ChainSpec& spec, double Js) {
  const int n = spec.n();
  for (int i = 0; i + 1 < n; ++i) {
    spec.couplings[i] = Js;
    spec.couplings[spec.N - 2 - i] = Js;
  }
}

struct ChainSetup {
  ChainSpec spec;
  int n = 0;
  double engineered_Js = std::numeric_limits<double>::quiet_NaN();
};

// `allow_oversized` keeps the sender block empty when 2n > N so that the
// spectrum command can still report the levels.
ChainSetup build_chain(const Options& o, const ChainOptions& c, bool allow_oversized = false) {
  ChainSetup s;
  if (c.spec->count()) {
    if (c.N->count() || c.Js->count()) throw ConfigError("--spec cannot be combined with --N or --Js");
    s.spec = load_chain_spec(o.spec_path);
    s.n = s.spec.n();
    if (c.n->count() && o.n != s.n)
      throw ConfigError("--n " + std::to_string(o.n) + " differs from the spec's sender block size " + std::to_string(s.n));
  } else {
    if (!c.N->count() || !c.n->count()) throw ConfigError("either --spec or both --N and --n are required");
    s.n = o.n;
    const int block = allow_oversized && 2 * o.n > o.N ? 0 : o.n;
    s.spec = weak_coupling_chain(o.N, block, o.J0, o.Js);
  }
  if (c.engineer->count()) {
    const auto ks = parse_int_list(o.engineer, "--engineer");
    if (ks.size() != 2) throw ConfigError("--engineer expects k,s");
    if (s.spec.n() < 2) throw ConfigError("--engineer needs a sender block of at least 2 sites");
    s.engineered_Js = engineered_sender_coupling(s.spec.wire_length(), ks[0], ks[1]);
    apply_block_coupling(s.spec, s.engineered_Js);
    s.spec.validate();
  }
  return s;
}

void check_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (format == a) return;
  throw ConfigError("unsupported --format '" + format + "'");
}

// ---------------------------------------------------------------- spectrum

std::string cmd_spectrum(const Options& o, const ChainOptions& c) {
  const std::string format = o.format.empty() ? "json" : o.format;
  check_format(format, {"json", "csv"});
  const ChainSetup setup = build_chain(o, c, true);
  const ChainSpec& spec = setup.spec;
  const EigenDecomposition eig = spectral(spec);

  json rep;
  std::string resonance_error;
  try {
    const ResonanceReport r = resonance_report(spec, setup.n);
    rep = {{"first_order_indices", r.first_order_indices},
           {"second_order_indices", r.second_order_indices},
           {"cluster_indices", r.cluster_indices},
           {"delta_omega", r.delta_omega},
           {"tau", std::numbers::pi / r.delta_omega},
           {"regime", to_string(r.regime)},
           {"note", r.note}};
  } catch (const ValidationError& e) {
    resonance_error = e.what();
  }

  if (format == "csv") {
    std::ostringstream os;
    os << "k,omega,block_weight\n";
    for (int k = 0; k < spec.N; ++k) {
      double w = 0.0;
      for (int s = 0; s < spec.n(); ++s)
        w += eig.phi(s, k) * eig.phi(s, k) + eig.phi(spec.N - 1 - s, k) * eig.phi(spec.N - 1 - s, k);
      os << k + 1 << ',' << fmt(eig.eigenvalues[k]) << ',' << fmt(w) << '\n';
    }
    return os.str();
  }
  json out;
  out["N"] = spec.N;
  out["n"] = setup.n;
  out["J0"] = spec.J0;
  out["eigenvalues"] = eig.eigenvalues;
  if (!std::isnan(setup.engineered_Js)) out["engineered_coupling"] = setup.engineered_Js;
  if (resonance_error.empty())
    out["resonance"] = rep;
  else {
    out["resonance"] = nullptr;
    out["resonance_error"] = resonance_error;
  }
  return out.dump(2) + "\n";
}

// -------------------------------------------------------------------- scan

void align_row(ScanRow& row, int n) {
  AmplitudeSet set;
  set.n = n;
  set.subsets = amplitude_subsets(n);
  for (auto& v : row.amplitudes) v = std::abs(v);
  set.values = row.amplitudes;
  const NiqstTerms t = niqst_decomposition(set, 1 << n);
  row.F_avg = t.total;
  row.classical = t.classical;
  row.quantum = t.quantum;
}

std::string cmd_scan(const Options& o, const ChainOptions& c) {
  const std::string format = o.format.empty() ? "csv" : o.format;
  check_format(format, {"csv", "json"});
  const std::string mode = o.mode.empty() ? "peaks" : o.mode;
  if (mode != "peaks" && mode != "grid") throw ConfigError("scan --mode must be peaks or grid");
  if (o.grid < 0) throw ConfigError("--grid must be >= 1");
  if (o.tmax < 0.0) throw ConfigError("--tmax must be >= 0");
  const ChainSetup setup = build_chain(o, c);
  const ChainSpec& spec = setup.spec;
  const int n = setup.n;
  if (n < 1) throw ConfigError("scan needs a sender block (n >= 1)");
  spec.require_free_fermion();
  const ReceiverLabeling labeling = parse_labeling(o.labeling);
  if (o.align_phase && (n != 1 || mode != "peaks"))
    throw ConfigError("--align-phase needs n = 1 and --mode peaks");

  std::vector<double> times;
  json summary;
  if (mode == "grid") {
    double T = o.tmax;
    if (T == 0.0) T = 1.2 * envelope(spec, n).period();
    const int points = o.grid == 0 ? 2001 : o.grid;
    for (int p = 0; p < points; ++p) times.push_back(points == 1 ? 0.0 : T * p / (points - 1));
  } else {
    ProtocolOptions popt;
    popt.t_max = o.tmax;
    popt.labeling = labeling;
    popt.align_single_phase = o.align_phase;
    popt.series_points = o.grid == 0 ? 2000 : static_cast<std::size_t>(o.grid);
    popt.threads = o.threads;
    const ProtocolResult r = find_optimal_time(spec, n, popt);
    for (const auto& [t, F] : r.time_series) times.push_back(t);
    times.insert(std::lower_bound(times.begin(), times.end(), r.optimal_time), r.optimal_time);
    json windows = json::array();
    for (const auto& w : r.readout_windows) windows.push_back({w.begin, w.end});
    summary = {{"optimal_time", r.optimal_time},
               {"fidelity_at_optimum", r.fidelity_at_optimum},
               {"envelope_period", r.envelope_period},
               {"window_end", r.window_end},
               {"coarse_spacing", r.coarse_spacing},
               {"cluster_indices", r.cluster.cluster_indices},
               {"delta_omega", r.cluster.delta_omega},
               {"regime", to_string(r.cluster.regime)},
               {"readout_windows", windows}};
  }

  ScanResult scan = fidelity_scan(spec, n, times, labeling, o.threads);
  if (o.align_phase)
    for (auto& row : scan.rows) align_row(row, n);

  if (format == "csv") {
    std::ostringstream os;
    os << "t,F_avg,F_envelope,random_guess,classical_term,quantum_term";
    for (const auto& s : scan.subsets) {
      const std::string l = subset_label(s);
      os << ',' << l << "_re," << l << "_im," << l << "_abs";
    }
    os << '\n';
    for (const auto& row : scan.rows) {
      os << fmt(row.t) << ',' << fmt(row.F_avg) << ',' << fmt(row.envelope) << ',' << fmt(row.random_guess) << ','
         << fmt(row.classical) << ',' << fmt(row.quantum);
      for (const cplx v : row.amplitudes) os << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << ',' << fmt(std::abs(v));
      os << '\n';
    }
    return os.str();
  }
  json rows = json::array();
  for (const auto& row : scan.rows) {
    json amps = json::array();
    for (const cplx v : row.amplitudes) amps.push_back({v.real(), v.imag()});
    rows.push_back({{"t", row.t},
                    {"F_avg", row.F_avg},
                    {"F_envelope", row.envelope},
                    {"random_guess", row.random_guess},
                    {"classical_term", row.classical},
                    {"quantum_term", row.quantum},
                    {"amplitudes", amps}});
  }
  json out;
  out["n"] = n;
  out["labeling"] = to_string(labeling);
  out["mode"] = mode;
  out["subsets"] = scan.subsets;
  if (!std::isnan(setup.engineered_Js)) out["engineered_coupling"] = setup.engineered_Js;
  if (!summary.is_null()) out["protocol"] = summary;
  out["rows"] = rows;
  return out.dump(2) + "\n";
}

// ------------------------------------------------------------- independent

constexpr int kMaxVarianceQubits = 5;

std::string cmd_independent(const Options& o) {
  const std::string format = o.format.empty() ? "csv" : o.format;
  check_format(format, {"csv", "json"});
  const auto ns = parse_int_list(o.nlist, "--nlist");
  for (int n : ns)
    if (n < 1 || n > 60) throw ConfigError("--nlist entries must be in [1, 60]");
  const int points = o.grid == 0 ? 101 : o.grid;
  if (points < 2) throw ConfigError("--grid must be >= 2 for the amplitude grid");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  struct Row {
    int n;
    double f, F, F1n, Rf, RF, second, var, cv, prod_var, locc;
  };
  std::vector<Row> rows;
  for (int n : ns) {
    const double d = std::ldexp(1.0, n);
    for (int q = 0; q < points; ++q) {
      const double f = static_cast<double>(q) / (points - 1);
      Row r{n, f, 0, 0, 0, nan, nan, nan, nan, 0, 2.0 / (d + 1.0)};
      r.F = independent_channels_fidelity(f, n);
      r.F1n = std::pow(independent_channels_fidelity(f, 1), n);
      r.Rf = ratio_product_vs_full_f(f, n);
      if (r.F > 1.0 / d) r.RF = ratio_product_vs_full_F(std::min(r.F, 1.0), n);
      const auto one = fidelity_stats(one_qubit_map(f));
      r.prod_var = product_state_variance(one, n);
      if (n <= kMaxVarianceQubits) {
        const auto s = fidelity_stats(tensor_power(one_qubit_map(f), n));
        r.second = s.second_moment;
        r.var = s.variance;
        r.cv = coefficient_of_variation(s);
      }
      rows.push_back(r);
    }
  }

  if (format == "csv") {
    std::ostringstream os;
    os << "n,f,F_avg,F1_pow_n,R_f,R_F,second_moment,variance,cv,product_variance,locc_limit\n";
    for (const Row& r : rows)
      os << r.n << ',' << fmt(r.f) << ',' << fmt(r.F) << ',' << fmt(r.F1n) << ',' << fmt(r.Rf) << ',' << fmt(r.RF) << ','
         << fmt(r.second) << ',' << fmt(r.var) << ',' << fmt(r.cv) << ',' << fmt(r.prod_var) << ',' << fmt(r.locc)
         << '\n';
    return os.str();
  }
  json out = json::array();
  for (const Row& r : rows)
    out.push_back({{"n", r.n},           {"f", r.f},         {"F_avg", r.F},         {"F1_pow_n", r.F1n},
                   {"R_f", r.Rf},        {"R_F", r.RF},      {"second_moment", r.second}, {"variance", r.var},
                   {"cv", r.cv},         {"product_variance", r.prod_var}, {"locc_limit", r.locc}});
  return out.dump(2) + "\n";
}

// -------------------------------------------------------------- montecarlo

struct MapSource {
  DynamicalMap map;
  int n = 0;
  std::string description;
  // For independent-channel maps the product-state moments are known exactly.
  bool has_product_reference = false;
  FidelityStats one_qubit;
};

MapSource load_map(const Options& o, const ChainOptions& c, CLI::Option* time_opt) {
  MapSource m;
  if (o.map.empty()) {
    const ChainSetup setup = build_chain(o, c);
    m.n = setup.n;
    if (m.n < 1) throw ConfigError("montecarlo needs a sender block (n >= 1)");
    const ReceiverLabeling labeling = parse_labeling(o.labeling);
    double t = o.time;
    if (!time_opt->count()) {
      ProtocolOptions popt;
      popt.labeling = labeling;
      popt.threads = o.threads;
      t = find_optimal_time(setup.spec, m.n, popt).optimal_time;
    }
    m.map = map_from_evolution(setup.spec, m.n, t, labeling);
    m.description = "chain N=" + std::to_string(setup.spec.N) + " t=" + fmt(t) + " labeling=" + to_string(labeling);
    return m;
  }
  if (c.spec->count() || c.N->count()) throw ConfigError("--map cannot be combined with a chain specification");
  if (o.map == "identity" || o.map.rfind("independent:", 0) == 0) {
    if (!c.n->count() || o.n < 1 || o.n > 4) throw ConfigError("--map " + o.map + " needs --n in [1, 4]");
    m.n = o.n;
    if (o.map == "identity") {
      m.map = identity_map(1 << o.n);
    } else {
      double f = 0.0;
      try {
        std::size_t used = 0;
        const std::string v = o.map.substr(12);
        f = std::stod(v, &used);
        if (used != v.size()) throw ConfigError("");
      } catch (const std::exception&) {
        throw ConfigError("--map independent:<f> needs a number f");
      }
      m.map = tensor_power(one_qubit_map(f), o.n);
      m.has_product_reference = true;
      m.one_qubit = fidelity_stats(one_qubit_map(f));
    }
    m.description = o.map;
    return m;
  }
  std::ifstream in(o.map);
  if (!in) throw ConfigError("cannot open map file '" + o.map + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  m.map = map_from_json(buf.str());
  m.n = 0;
  while ((1 << m.n) < m.map.d()) ++m.n;
  if ((1 << m.n) != m.map.d()) throw ConfigError("map dimension must be a power of two");
  m.description = "file " + o.map;
  return m;
}

double z_score(double estimate, double expect, double se) {
  const double diff = estimate - expect;
  if (se > 0.0) return diff / se;
  return std::abs(diff) <= 1e-12 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

json mc_block(const McResult& r) {
  return {{"samples", r.samples},
          {"seed", r.seed},
          {"mean", r.mean},
          {"second_moment", r.second_moment},
          {"variance", r.second_moment - r.mean * r.mean},
          {"std_error_mean", r.std_error_mean},
          {"std_error_second_moment", r.std_error_second_moment}};
}

std::string cmd_montecarlo(const Options& o, const ChainOptions& c, CLI::Option* seed_opt, CLI::Option* time_opt,
                           bool& statistical_failure) {
  const std::string format = o.format.empty() ? "json" : o.format;
  check_format(format, {"json"});
  if (!seed_opt->count()) throw ConfigError("montecarlo requires --seed");
  if (o.samples < 2) throw ConfigError("--samples must be >= 2");
  const std::string mode = o.mode.empty() ? "haar" : o.mode;
  if (mode != "haar" && mode != "product" && mode != "both") throw ConfigError("montecarlo --mode must be haar, product or both");

  const MapSource src = load_map(o, c, time_opt);
  const PureStateFidelity eval(src.map);
  const FidelityStats exact = fidelity_stats(src.map);

  json out;
  out["map"] = src.description;
  out["d"] = src.map.d();
  out["mode"] = mode;
  out["analytic"] = {{"mean", exact.mean}, {"second_moment", exact.second_moment}, {"variance", exact.variance}};
  double worst_z = 0.0;
  auto check = [&](json& block, double mean, double second, const McResult& r) {
    const double zm = z_score(r.mean, mean, r.std_error_mean);
    const double zs = z_score(r.second_moment, second, r.std_error_second_moment);
    block["z_mean"] = zm;
    block["z_second_moment"] = zs;
    worst_z = std::max({worst_z, std::abs(zm), std::abs(zs)});
  };
  if (mode == "haar" || mode == "both") {
    const McResult r = haar_sample_fidelity(eval, src.map.d(), o.samples, o.seed, o.threads);
    json block = mc_block(r);
    check(block, exact.mean, exact.second_moment, r);
    out["haar"] = block;
  }
  if (mode == "product" || mode == "both") {
    const McResult r = haar_sample_product_states(eval, src.n, o.samples, o.seed, o.threads);
    json block = mc_block(r);
    if (src.has_product_reference) {
      const double mean = std::pow(src.one_qubit.mean, src.n);
      const double second = std::pow(src.one_qubit.second_moment, src.n);
      block["analytic_mean"] = mean;
      block["analytic_second_moment"] = second;
      block["analytic_variance"] = product_state_variance(src.one_qubit, src.n);
      check(block, mean, second, r);
    }
    out["product"] = block;
  }
  out["max_abs_z"] = worst_z;
  out["z_threshold"] = kMaxAbsZ;
  out["passed"] = worst_z <= kMaxAbsZ;
  statistical_failure = !(worst_z <= kMaxAbsZ);
  return out.dump(2) + "\n";
}

// ------------------------------------------------------------------ driver

// Pulls --config out of argv, turning its JSON object into option tokens that
// precede the command-line ones (the last occurrence of an option wins).
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  if (rest.empty()) throw ConfigError("a subcommand must be given on the command line");
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(rest[0]);
  } catch (const CLI::OptionNotFound&) {
    throw ConfigError("unknown subcommand '" + rest[0] + "'");
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config file: invalid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config file: top level must be an object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw ConfigError("config file: unknown key '" + key + "' for '" + rest[0] + "'");
    if (opt->get_type_size() == 0) {
      if (!value.is_boolean()) throw ConfigError("config file: '" + key + "' must be true or false");
      if (value.get<bool>()) tokens.push_back("--" + key);
      continue;
    }
    std::string text;
    if (value.is_string())
      text = value.get<std::string>();
    else if (value.is_number_integer() || value.is_number_unsigned())
      text = value.dump();
    else if (value.is_number_float())
      text = fmt(value.get<double>());
    else
      throw ConfigError("config file: '" + key + "' must be a string or a number");
    tokens.push_back("--" + key);
    tokens.push_back(text);
  }
  std::vector<std::string> out = {rest[0]};
  out.insert(out.end(), tokens.begin(), tokens.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

int run(int argc, char** argv) {
  Options o;
  CLI::App app{"Spin-chain quantum state transfer: spectra, fidelity scans, independent channels, Monte Carlo."};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto common = [&](CLI::App* sub) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--out", o.out, "output file (default: stdout)");
    sub->add_option("--format", o.format, "csv or json");
  };

  CLI::App* spectrum = app.add_subcommand("spectrum", "single-particle levels and resonance report");
  common(spectrum);
  const ChainOptions spectrum_chain = add_chain_options(spectrum, o);

  CLI::App* scan = app.add_subcommand("scan", "<F_n>(t) with its decomposition and block amplitudes");
  common(scan);
  const ChainOptions scan_chain = add_chain_options(scan, o);
  scan->add_option("--tmax", o.tmax, "end of the time window (default 1.2 tau)");
  scan->add_option("--grid", o.grid, "grid points (grid mode) or series buckets (peaks mode)");
  scan->add_option("--mode", o.mode, "peaks (protocol search, default) or grid (uniform grid)");
  scan->add_option("--labeling", o.labeling, "receiver labeling: translation (default) or mirror");
  scan->add_flag("--align-phase", o.align_phase, "n = 1 only: report the phase-aligned fidelity");
  scan->add_option("--threads", o.threads, "worker threads (0 = all cores)");

  CLI::App* independent = app.add_subcommand("independent", "independent-channel analytics over an amplitude grid");
  common(independent);
  independent->add_option("--nlist", o.nlist, "comma-separated channel counts");
  independent->add_option("--grid", o.grid, "number of f points in [0, 1]");

  CLI::App* montecarlo = app.add_subcommand("montecarlo", "Haar Monte Carlo against the closed-form moments");
  common(montecarlo);
  const ChainOptions mc_chain = add_chain_options(montecarlo, o);
  CLI::Option* seed_opt = montecarlo->add_option("--seed", o.seed, "RNG seed (required)");
  montecarlo->add_option("--samples", o.samples, "number of sampled states");
  CLI::Option* time_opt = montecarlo->add_option("--time", o.time, "evolution time (default: protocol optimum)");
  montecarlo->add_option("--map", o.map, "map JSON file, 'identity' or 'independent:<f>' (with --n)");
  montecarlo->add_option("--mode", o.mode, "haar (default), product or both");
  montecarlo->add_option("--labeling", o.labeling, "receiver labeling for chain maps");
  montecarlo->add_option("--threads", o.threads, "worker threads (0 = all cores)");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "qst: " << e.what() << '\n';
    return kExitConfig;
  }

  // Everything is computed before the single write at the end.
  std::string text;
  bool statistical_failure = false;
  try {
    if (spectrum->parsed())
      text = cmd_spectrum(o, spectrum_chain);
    else if (scan->parsed())
      text = cmd_scan(o, scan_chain);
    else if (independent->parsed())
      text = cmd_independent(o);
    else
      text = cmd_montecarlo(o, mc_chain, seed_opt, time_opt, statistical_failure);
  } catch (const ConfigError& e) {
    std::cerr << "qst: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "qst: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "qst: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }

  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(o.out, std::ios::binary);
    if (!out || !(out << text)) {
      std::cerr << "qst: cannot write '" << o.out << "'\n";
      return kExitConfig;
    }
  }
  if (statistical_failure) {
    std::cerr << "qst: Monte Carlo z-score exceeds " << kMaxAbsZ << '\n';
    return kExitStatistical;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
