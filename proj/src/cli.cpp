#include "netscat/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "netscat/doublet.hpp"
#include "netscat/ensemble.hpp"
#include "netscat/errors.hpp"
#include "netscat/format.hpp"
#include "netscat/network.hpp"
#include "netscat/scattering.hpp"
#include "netscat/statistics.hpp"

namespace netscat {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad flag combinations found after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads nested JSON objects as CLI11 config sections ({"ensemble": {...}}).
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    throw CLI::ConfigError("writing JSON config is not supported");
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("invalid JSON config: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    if (!j.is_object()) throw CLI::ConfigError("JSON config must be an object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto sub = parents;
        sub.push_back(key);
        flatten(value, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& e : value) item.inputs.push_back(scalar(e));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

bool is_json_config(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    std::string path;
    if (a == "--config" && i + 1 < argc) path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    if (!path.empty()) return fs::path(path).extension() == ".json";
  }
  return false;
}

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out_dir = ".";
  bool dry_run = false;
};

template <class T>
void default_if_unset(const CLI::Option* opt, T& field, T value) {
  if (opt->count() == 0) field = value;
}

// Flags shared by spectrum, dwell and doublet.
struct NetworkFlags {
  std::string preset;
  int n = 2;
  double xi = 0.0;
  double chi = 0.0;
  double eprime = 0.0;
  double v = 1.0;
  std::optional<double> gamma;
  double emin = -3.0;
  double emax = 3.0;
  int points = 601;
  std::string hamiltonian;
  bool sample_onsite = false;
  double eps = 0.05;

  struct Opts {
    CLI::Option *preset, *n, *xi, *chi, *eprime, *v, *gamma, *emin, *emax, *points, *ham, *onsite,
        *eps;
  } opts{};

  void attach(CLI::App* sub, bool with_grid) {
    opts.preset = sub->add_option("--preset", preset, "Parameter set: fig1, fig2, fig3")
                      ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
    opts.n = sub->add_option("--n", n, "Number of sites (even, >= 2)")->check(CLI::Range(2, 4096));
    opts.xi = sub->add_option("--xi", xi, "Bulk coupling scale xi")->check(CLI::NonNegativeNumber);
    opts.chi = sub->add_option("--chi", chi, "Input/output-to-bulk coupling scale chi")
                   ->check(CLI::NonNegativeNumber);
    opts.eprime = sub->add_option("--eprime", eprime, "On-site energy E' of input and output");
    opts.v = sub->add_option("--v", v, "Direct input-output coupling V");
    opts.gamma = sub->add_option("--gamma", gamma, "Channel rate Gamma (required unless --preset)")
                     ->check(CLI::NonNegativeNumber);
    if (with_grid) {
      opts.emin = sub->add_option("--emin", emin, "Lower end of the energy grid");
      opts.emax = sub->add_option("--emax", emax, "Upper end of the energy grid");
      opts.points = sub->add_option("--points", points, "Number of grid points")
                        ->check(CLI::PositiveNumber);
    }
    opts.ham = sub->add_option("--hamiltonian", hamiltonian,
                               "Read the Hamiltonian from a JSON file instead of sampling");
    opts.onsite = sub->add_flag("--sample-onsite", sample_onsite,
                                "Draw E' ~ Normal(0, 2 xi^2/N) with the random Hamiltonian");
    if (!with_grid) {
      opts.eps = sub->add_option("--eps", eps, "Doublet deficit budget for warnings")
                     ->check(CLI::Range(0.0, 1.0));
    }
  }

  // Fills every flag the user did not set from the preset.
  void apply_preset(Globals& g) {
    if (preset.empty()) return;
    if (preset == "fig1" || preset == "fig2") {
      default_if_unset(opts.n, n, 8);
      default_if_unset(opts.xi, xi, 1.0);
      default_if_unset(opts.chi, chi, 1.0);
      default_if_unset(opts.eprime, eprime, 0.0);
      default_if_unset(opts.v, v, 1.0);
      if (opts.gamma->count() == 0) gamma = 5.0;
      if (opts.emin) default_if_unset(opts.emin, emin, -4.0);
      if (opts.emax) default_if_unset(opts.emax, emax, 4.0);
      if (opts.points) default_if_unset(opts.points, points, 2000);
      if (!g.seed) g.seed = 7;
    } else if (preset == "fig3") {
      default_if_unset(opts.n, n, 10);
      default_if_unset(opts.xi, xi, 10.0);
      default_if_unset(opts.chi, chi, 1.0);
      default_if_unset(opts.eprime, eprime, 0.0);
      default_if_unset(opts.v, v, 0.01);
      if (opts.gamma->count() == 0) gamma = 0.2;
      if (opts.emin) default_if_unset(opts.emin, emin, -1.0);
      if (opts.emax) default_if_unset(opts.emax, emax, 1.0);
      if (opts.points) default_if_unset(opts.points, points, 4001);
      if (!g.seed) g.seed = 1;
    }
  }

  NetworkParams params() const {
    NetworkParams p;
    p.n_sites = n;
    p.onsite_energy = eprime;
    p.direct_coupling = v;
    p.bulk_scale = xi;
    p.link_scale = chi;
    p.sample_onsite = sample_onsite;
    return p;
  }

  void validate(bool with_grid) const {
    if (!gamma) throw UsageError("--gamma is required");
    if (hamiltonian.empty()) params().validate();
    if (with_grid) {
      if (!std::isfinite(emin) || !std::isfinite(emax)) throw UsageError("--emin/--emax must be finite");
      if (points > 1 && !(emax > emin)) throw UsageError("--emax must exceed --emin");
    }
  }

  json describe(const Globals& g) const {
    json j;
    if (!preset.empty()) j["preset"] = preset;
    if (hamiltonian.empty()) {
      j["network"] = params();
      j["seed"] = g.seed ? json(*g.seed) : json(nullptr);
    } else {
      j["hamiltonian_file"] = hamiltonian;
    }
    j["gamma"] = *gamma;
    return j;
  }

  NetworkHamiltonian build(const Globals& g) const {
    if (!hamiltonian.empty()) {
      std::ifstream in(hamiltonian);
      if (!in) throw Error("cannot open " + hamiltonian);
      json j;
      in >> j;
      return j.get<NetworkHamiltonian>();
    }
    const NetworkParams p = params();
    if (g.seed) return sample_random(p, *g.seed);
    const Index m = p.n_sites - 2;
    return build_deterministic(p, RealVector::Zero(m), RealMatrix::Zero(m, m));
  }
};

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  return os;
}

// spectrum / dwell
int cmd_scan(const NetworkFlags& f, const Globals& g, const std::string& stem, std::ostream& out) {
  const NetworkHamiltonian h = f.build(g);
  const auto c = ChannelCoupling::symmetric(*f.gamma);
  const auto grid = uniform_grid(f.emin, f.emax, f.points);
  const ScatteringResponse r = scan(h, c, grid);

  const fs::path dir(g.out_dir);
  ensure_dir(dir);
  const fs::path csv = dir / (stem + ".csv");
  const fs::path side = dir / (stem + ".json");
  {
    auto os = open_out(csv);
    write_response_csv(os, r);
  }
  json meta = f.describe(g);
  meta["command"] = stem;
  meta["grid"] = {{"emin", f.emin}, {"emax", f.emax}, {"points", f.points}};
  meta["hamiltonian"] = h;
  meta["resonances"] = resonances_json(r);
  {
    auto os = open_out(side);
    os << meta.dump(2) << '\n';
  }

  Index imax = 0;
  r.p.maxCoeff(&imax);
  json report{{"csv", csv.generic_string()},
              {"json", side.generic_string()},
              {"points", r.size()},
              {"max_p", r.p(imax)},
              {"argmax_energy", r.energies(imax)},
              {"n_peaks", local_maxima(r.p).size()}};
  std::size_t missing = 0;
  std::optional<double> tau_max;
  double tau_at = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    const auto& t = r.tau[static_cast<std::size_t>(i)];
    if (!t) {
      ++missing;
    } else if (!tau_max || *t > *tau_max) {
      tau_max = *t;
      tau_at = r.energies(i);
    }
  }
  report["max_tau"] = optional_number(tau_max);
  report["argmax_tau_energy"] = tau_max ? json(tau_at) : json(nullptr);
  report["missing_tau"] = missing;
  double min_width = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < r.resonances.eigenvalues.size(); ++k) {
    min_width = std::min(min_width, -2.0 * r.resonances.eigenvalues(k).imag());
  }
  report["narrowest_resonance_width"] =
      std::isfinite(min_width) ? json(min_width) : json(nullptr);
  out << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_doublet(const NetworkFlags& f, const Globals& g, std::ostream& out) {
  const NetworkHamiltonian h = f.build(g);
  const double gamma = *f.gamma;
  const double onsite = h.onsite_energy();
  const double coupling = h.direct_coupling();
  const NetworkParams& p = h.params;

  const SymmetryBlocks blocks = decompose_symmetry(h);
  const double eps = doublet_quality(blocks);
  const DoubletShifts exact = exact_doublet_shifts(blocks);

  json warnings = json::array();
  DoubletShifts shifts = exact;
  std::string source = "perturbative";
  try {
    shifts = perturbative_shifts(blocks, p.bulk_scale);
  } catch (const NearDegenerate& e) {
    warnings.push_back({{"type", "near_degenerate"}, {"message", e.what()}});
    source = "exact";
  }
  const DoubletAnalysis a = DoubletAnalysis::from_shifts(shifts, onsite, coupling, gamma, eps);

  if (eps > f.eps) {
    warnings.push_back({{"type", "epsilon_violation"},
                        {"source", "realization"},
                        {"epsilon", eps},
                        {"budget", f.eps}});
  }
  json bound = nullptr;
  if (p.n_sites >= 4 && p.bulk_scale > 0.0) {
    const double measure = dominant_doublet_measure(p.link_scale, p.bulk_scale, p.n_sites);
    bound = {{"measure", measure}, {"budget", f.eps}, {"satisfied", measure <= f.eps}};
    if (measure > f.eps) {
      warnings.push_back({{"type", "epsilon_violation"},
                          {"source", "dominant_doublet_bound"},
                          {"measure", measure},
                          {"budget", f.eps}});
    }
  }

  const ScatteringSystem sys(h, ChannelCoupling::symmetric(gamma));
  const auto& energies = a.resonance_energies;
  json peaks = json::array();
  for (std::size_t k = 0; k < energies.size(); ++k) {
    const double e = energies[k];
    double w = std::max(gamma, std::abs(2.0 * coupling + a.delta_s));
    if (energies.size() == 2) w = 0.5 * std::min(gamma, energies[1] - energies[0]);
    if (!(w > 0.0)) w = 1e-3 * std::max(1.0, std::abs(coupling));
    json row{{"predicted_energy", e},
             {"predicted_p", approx_transfer_probability(a, onsite, coupling, gamma, e)}};
    try {
      row["predicted_tau"] = approx_dwell_time(a, onsite, coupling, gamma, e);
    } catch (const VanishingAmplitude&) {
      row["predicted_tau"] = nullptr;
    }
    const Peak pk = locate_peak(sys, e - w, e + w);
    row["exact_peak_energy"] = pk.energy;
    row["exact_peak_p"] = pk.p;
    try {
      row["exact_tau"] = dwell_time(sys.response(pk.energy));
    } catch (const VanishingAmplitude&) {
      row["exact_tau"] = nullptr;
    }
    peaks.push_back(std::move(row));
  }

  json report = f.describe(g);
  report["onsite_energy"] = onsite;
  report["epsilon"] = eps;
  report["shift_source"] = source;
  report["s_plus"] = a.s_plus;
  report["s_minus"] = a.s_minus;
  report["delta_s"] = a.delta_s;
  report["s_bar"] = a.s_bar;
  report["exact_shifts"] = {{"s_plus", exact.s_plus}, {"s_minus", exact.s_minus}};
  report["regime"] = std::string(to_string(a.regime));
  report["resonances"] = peaks;
  report["dominant_doublet_bound"] = bound;
  report["warnings"] = warnings;
  out << report.dump(2) << '\n';
  return kExitOk;
}

struct EnsembleFlags {
  std::string preset;
  std::optional<int> realizations, gamma_count, n, bins;
  std::optional<double> gamma_start, gamma_factor, xi, chi, v, eprime, eps, delta, sigma_tilde;
  std::vector<double> gamma_tilde, gamma_list;
  bool pin_onsite = false;
  bool detuned = false;
  bool chi_from_bound = false;
  std::string shift_source;
  std::string timestamp;

  void attach(CLI::App* sub) {
    std::vector<std::string> names = sweep_preset_names();
    sub->add_option("--preset", preset, "Parameter set: " + CLI::detail::join(names, ", "))
        ->check(CLI::IsMember(names));
    sub->add_option("--realizations", realizations, "Disorder realizations per Gamma")
        ->check(CLI::PositiveNumber);
    sub->add_option("--gamma-start", gamma_start, "First Gamma of the geometric grid")
        ->check(CLI::PositiveNumber);
    sub->add_option("--gamma-factor", gamma_factor, "Ratio between consecutive Gammas")
        ->check(CLI::PositiveNumber);
    sub->add_option("--gamma-count", gamma_count, "Number of Gammas")->check(CLI::PositiveNumber);
    sub->add_option("--gamma-tilde", gamma_tilde, "Explicit Gamma/2V values (overrides the grid)")
        ->delimiter(',');
    sub->add_option("--gamma-list", gamma_list, "Explicit Gamma values (overrides the grid)")
        ->delimiter(',');
    sub->add_option("--n", n, "Number of sites (even, >= 4)");
    sub->add_option("--xi", xi, "Bulk coupling scale xi")->check(CLI::NonNegativeNumber);
    sub->add_option("--chi", chi, "Input/output-to-bulk coupling scale chi")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--v", v, "Direct input-output coupling V");
    sub->add_option("--eprime", eprime, "On-site energy E' (used with --pin-onsite)");
    sub->add_flag("--pin-onsite", pin_onsite, "Keep E' fixed instead of sampling it");
    sub->add_option("--eps", eps, "Doublet deficit budget")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
    sub->add_option("--delta", delta, "Edge cutoff of the efficiency density")
        ->check(CLI::Range(0.0, 0.5));
    sub->add_option("--shift-source", shift_source,
                    "Doublet shift for the evaluation energy: exact or perturbative")
        ->check(CLI::IsMember({"exact", "perturbative"}));
    sub->add_flag("--detuned", detuned, "Evaluate at the split-resonance optimum");
    sub->add_option("--sigma-tilde", sigma_tilde, "Set V so that chi^2/(V xi) equals this")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--chi-from-bound", chi_from_bound,
                  "Set chi to saturate the dominant-doublet bound at --eps");
    sub->add_option("--timestamp", timestamp, "Start time recorded verbatim in the manifest");
  }

  SweepConfig resolve(const Globals& g, json& derived) const {
    SweepConfig c;
    if (!preset.empty()) {
      c = *sweep_preset(preset);
    } else {
      c.network.n_sites = 8;
      c.network.bulk_scale = 1.0;
      c.network.link_scale = 1.0;
      c.network.direct_coupling = 1.0;
      c.network.sample_onsite = true;
      c.gamma_start = 0.02;
      c.gamma_count = 51;
    }
    const double v_preset = c.network.direct_coupling;
    if (n) c.network.n_sites = *n;
    if (xi) c.network.bulk_scale = *xi;
    if (chi) c.network.link_scale = *chi;
    if (v) c.network.direct_coupling = *v;
    if (eprime) c.network.onsite_energy = *eprime;
    if (pin_onsite) c.network.sample_onsite = false;
    if (eps) c.epsilon_budget = *eps;
    if (chi_from_bound) {
      c.network.link_scale = chi_at_doublet_bound(c.network.bulk_scale, c.network.n_sites,
                                                  c.epsilon_budget);
    }
    if (sigma_tilde) {
      c.network.direct_coupling =
          coupling_for_sigma(c.network.link_scale, c.network.bulk_scale, *sigma_tilde);
    }
    if (!preset.empty() && c.network.direct_coupling != v_preset) {
      // preset Gamma grids are fixed in units of 2V
      const double r = c.network.direct_coupling / v_preset;
      c.gamma_start *= r;
      for (double& x : c.gamma_list) x *= r;
    }
    if (realizations) c.n_realizations = *realizations;
    if (gamma_start) c.gamma_start = *gamma_start;
    if (gamma_factor) c.gamma_factor = *gamma_factor;
    if (gamma_count) c.gamma_count = *gamma_count;
    if (!gamma_list.empty()) c.gamma_list = gamma_list;
    if (!gamma_tilde.empty()) {
      c.gamma_list.clear();
      for (double x : gamma_tilde) c.gamma_list.push_back(2.0 * std::abs(c.network.direct_coupling) * x);
    }
    if (bins) c.n_bins = *bins;
    if (delta) c.delta = *delta;
    if (!shift_source.empty()) c.shift_source = shift_source_from_string(shift_source);
    if (detuned) c.detuned = true;
    if (g.seed) c.master_seed = *g.seed;
    c.validate();

    const NetworkParams& p = c.network;
    derived = {{"chi", p.link_scale}, {"V", p.direct_coupling}, {"xi", p.bulk_scale}, {"N", p.n_sites}};
    if (p.link_scale > 0.0 && p.bulk_scale > 0.0 && p.direct_coupling != 0.0) {
      const DisorderScales s =
          scaled_params_from_model(p.link_scale, p.bulk_scale, p.direct_coupling, p.n_sites);
      derived["sigma_tilde"] = s.sigma_tilde;
      derived["s0_tilde"] = s.s0_tilde;
      derived["dominant_doublet_measure"] =
          dominant_doublet_measure(p.link_scale, p.bulk_scale, p.n_sites);
    }
    return c;
  }
};

int cmd_ensemble(const EnsembleFlags& f, const SweepConfig& c, const json& derived,
                 const Globals& g, std::ostream& out) {
  const int threads =
      g.threads > 0 ? g.threads : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  const EnsembleResult result = run_sweep(c, threads);
  ArtifactOptions opts;
  if (!f.timestamp.empty()) opts.started_at = f.timestamp;
  const fs::path dir(g.out_dir);
  ensure_dir(dir);
  const json manifest = write_sweep_artifacts(result, dir, opts);

  out << "derived:";
  for (const auto& [k, val] : derived.items()) out << ' ' << k << '=' << val.dump();
  out << '\n';
  out << std::left << std::setw(14) << "gamma_tilde" << std::setw(12) << "mean_p" << std::setw(12)
      << "median_p" << std::setw(12) << "tv" << std::setw(12) << "tv_emp" << std::setw(10) << "n_ok"
      << std::setw(10) << "rej_deg" << "eps_viol" << '\n';
  for (const auto& e : manifest.at("per_gamma")) {
    auto num = [](const json& x) {
      if (x.is_null()) return std::string("-");
      std::ostringstream os;
      os << std::setprecision(6) << x.get<double>();
      return os.str();
    };
    std::ostringstream row;
    row << std::left << std::setw(14) << num(e.at("gamma_tilde")) << std::setw(12)
        << num(e.at("mean_p")) << std::setw(12) << num(e.at("median_p")) << std::setw(12)
        << num(e.at("tv_distance")) << std::setw(12) << num(e.at("tv_distance_empirical"))
        << std::setw(10) << e.at("n_ok").get<std::uint64_t>() << std::setw(10)
        << e.at("n_rejected_degenerate").get<std::uint64_t>()
        << e.at("n_eps_violation").get<std::uint64_t>();
    out << row.str() << '\n';
  }
  out << "artifacts: " << dir.generic_string() << '\n';
  return kExitOk;
}

struct DensityFlags {
  std::string preset;
  std::vector<double> sigma{1.0};
  double s0 = 0.0;
  double gt_min = 1e-2;
  double gt_max = 1e2;
  int gt_points = 201;
  int p_points = 200;
  double delta = kDefaultEdgeCutoff;

  CLI::Option* sigma_opt = nullptr;
  CLI::Option* s0_opt = nullptr;

  void attach(CLI::App* sub) {
    sub->add_option("--preset", preset, "Parameter set: fig4 (efficient fraction) or fig5 (P(p))")
        ->check(CLI::IsMember({"fig4", "fig5"}));
    sigma_opt = sub->add_option("--sigma", sigma, "Width(s) sigma~ of the relative-shift law")
                    ->delimiter(',')
                    ->check(CLI::PositiveNumber);
    s0_opt = sub->add_option("--s0", s0, "Centre s0~ of the relative-shift law");
    sub->add_option("--gt-min", gt_min, "Smallest Gamma~ of the log grid")->check(CLI::PositiveNumber);
    sub->add_option("--gt-max", gt_max, "Largest Gamma~ of the log grid")->check(CLI::PositiveNumber);
    sub->add_option("--gt-points", gt_points, "Gamma~ grid points")->check(CLI::PositiveNumber);
    sub->add_option("--p-points", p_points, "p grid points on [delta, 1-delta]")
        ->check(CLI::PositiveNumber);
    sub->add_option("--delta", delta, "Edge cutoff of the efficiency density")
        ->check(CLI::Range(0.0, 0.5));
  }

  void resolve() {
    if (preset == "fig4") default_if_unset(sigma_opt, sigma, std::vector<double>{0.1, 1.0, 10.0});
    if (preset == "fig5") default_if_unset(sigma_opt, sigma, std::vector<double>{10.0});
    if (!(gt_max >= gt_min)) throw UsageError("--gt-max must not be below --gt-min");
    if (gt_points > 1 && gt_max == gt_min) throw UsageError("--gt-max must exceed --gt-min");
    if (!(delta > 0.0)) throw UsageError("--delta must be positive");
    if (!std::isfinite(s0)) throw UsageError("--s0 must be finite");
  }

  std::vector<double> gt_grid() const {
    std::vector<double> g(static_cast<std::size_t>(gt_points));
    if (gt_points == 1) return {gt_min};
    const double a = std::log(gt_min), b = std::log(gt_max);
    for (int i = 0; i < gt_points; ++i) g[i] = std::exp(a + (b - a) * i / (gt_points - 1));
    g.front() = gt_min;
    g.back() = gt_max;
    return g;
  }

  std::vector<double> p_grid() const {
    if (p_points == 1) return {0.5};
    std::vector<double> g(static_cast<std::size_t>(p_points));
    for (int i = 0; i < p_points; ++i) g[i] = delta + (1.0 - 2.0 * delta) * i / (p_points - 1);
    return g;
  }

  json describe() const {
    json j{{"sigma_tilde", sigma}, {"s0_tilde", s0},       {"gt_min", gt_min},
           {"gt_max", gt_max},     {"gt_points", gt_points}, {"p_points", p_points},
           {"delta", delta}};
    if (!preset.empty()) j["preset"] = preset;
    return j;
  }
};

int cmd_density(const DensityFlags& f, const Globals& g, std::ostream& out) {
  const fs::path dir(g.out_dir);
  ensure_dir(dir);
  const auto gts = f.gt_grid();
  json report = f.describe();
  json files = json::array();

  const bool want_fraction = f.preset != "fig5";
  const bool want_density = f.preset != "fig4";

  if (want_fraction) {
    const fs::path path = dir / "efficient_fraction.csv";
    auto os = open_out(path);
    os << "sigma_tilde,x,f\n";
    json mid = json::array();
    for (double s : f.sigma) {
      for (double x : gts) {
        os << format_double(s) << ',' << format_double(x) << ','
           << format_double(efficient_fraction(x, s, f.s0)) << '\n';
      }
      mid.push_back({{"sigma_tilde", s}, {"gamma_tilde_half", efficient_fraction_midpoint(s, f.s0)}});
    }
    report["midpoints"] = mid;
    files.push_back(path.generic_string());
  }
  if (want_density) {
    const auto ps = f.p_grid();
    for (double s : f.sigma) {
      std::string name = "efficiency_density.csv";
      if (f.sigma.size() > 1) name = "efficiency_density_s" + format_double(s) + ".csv";
      const fs::path path = dir / name;
      auto os = open_out(path);
      os << "gamma_tilde,p,f\n";
      for (double x : gts) {
        for (double p : ps) {
          os << format_double(x) << ',' << format_double(p) << ','
             << format_double(efficiency_density(p, x, s, f.s0, f.delta)) << '\n';
        }
      }
      files.push_back(path.generic_string());
    }
    const fs::path path = dir / "dimer_baseline.csv";
    auto os = open_out(path);
    os << "x,f\n";
    const auto base = dimer_baseline(gts, 0.5);  // V = 1/2 makes Gamma = Gamma~
    for (std::size_t i = 0; i < gts.size(); ++i) {
      os << format_double(gts[i]) << ',' << format_double(base[i]) << '\n';
    }
    files.push_back(path.generic_string());
  }
  report["files"] = files;
  out << report.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Excitation transport across centrosymmetric disordered networks", "netscat"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_version_flag("--version", git_describe());

  Globals g;
  app.add_option("--seed", g.seed, "Master seed for random draws");
  app.add_option("--threads", g.threads, "Worker threads for ensembles (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for output files");
  app.add_flag("--dry-run", g.dry_run, "Print the resolved configuration and exit");
  app.set_config("--config", "", "Read options from a TOML or JSON file (flags take precedence)");
  if (is_json_config(argc, argv)) app.config_formatter(std::make_shared<JsonConfig>());

  NetworkFlags spectrum_flags, dwell_flags, doublet_flags;
  EnsembleFlags ensemble_flags;
  DensityFlags density_flags;

  auto* spectrum = app.add_subcommand("spectrum", "Transfer probability on an energy grid");
  spectrum_flags.attach(spectrum, true);
  auto* dwell = app.add_subcommand("dwell", "Dwell time on an energy grid");
  dwell_flags.attach(dwell, true);
  auto* doublet = app.add_subcommand("doublet", "Dominant-doublet analysis of one Hamiltonian");
  doublet_flags.attach(doublet, false);
  auto* ensemble = app.add_subcommand("ensemble", "Monte-Carlo sweep of transfer efficiency over Gamma");
  ensemble_flags.attach(ensemble);
  auto* density = app.add_subcommand("density", "Tabulate the analytic efficiency distributions");
  density_flags.attach(density);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // Resolution: everything here is a usage error.
  std::optional<SweepConfig> sweep;
  json derived;
  NetworkFlags* net = nullptr;
  std::string name;
  try {
    if (spectrum->parsed()) net = &spectrum_flags, name = "spectrum";
    if (dwell->parsed()) net = &dwell_flags, name = "dwell";
    if (doublet->parsed()) net = &doublet_flags, name = "doublet";
    if (net) {
      net->apply_preset(g);
      net->validate(name != "doublet");
    }
    if (ensemble->parsed()) {
      name = "ensemble";
      sweep = ensemble_flags.resolve(g, derived);
    }
    if (density->parsed()) {
      name = "density";
      density_flags.resolve();
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    if (CLI::App* sub = net ? app.get_subcommand(name) : nullptr) err << sub->help();
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (g.dry_run) {
    json j{{"command", name}, {"out_dir", g.out_dir}, {"threads", g.threads}};
    if (net) {
      j["config"] = net->describe(g);
      if (name != "doublet") j["grid"] = {{"emin", net->emin}, {"emax", net->emax}, {"points", net->points}};
      else j["eps"] = net->eps;
    }
    if (sweep) {
      j["config"] = *sweep;
      j["derived"] = derived;
    }
    if (name == "density") j["config"] = density_flags.describe();
    out << j.dump(2) << '\n';
    return kExitOk;
  }

  try {
    if (name == "spectrum" || name == "dwell") return cmd_scan(*net, g, name, out);
    if (name == "doublet") return cmd_doublet(*net, g, out);
    if (name == "ensemble") return cmd_ensemble(ensemble_flags, *sweep, derived, g, out);
    if (name == "density") return cmd_density(density_flags, g, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace netscat
