#include "netscat/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include "netscat/doublet.hpp"
#include "netscat/format.hpp"
#include "netscat/rng.hpp"
#include "netscat/scattering.hpp"

#ifndef NETSCAT_GIT_DESCRIBE
#define NETSCAT_GIT_DESCRIBE "unknown"
#endif

namespace netscat {

std::string git_describe() { return NETSCAT_GIT_DESCRIBE; }

std::string_view to_string(ShiftSource s) {
  return s == ShiftSource::Exact ? "exact" : "perturbative";
}

ShiftSource shift_source_from_string(std::string_view s) {
  if (s == "exact") return ShiftSource::Exact;
  if (s == "perturbative") return ShiftSource::Perturbative;
  throw InvalidParameter("unknown shift source '" + std::string(s) + "'");
}

std::vector<double> SweepConfig::gammas() const {
  if (!gamma_list.empty()) return gamma_list;
  std::vector<double> g(static_cast<std::size_t>(std::max(gamma_count, 0)));
  double x = gamma_start;
  for (auto& v : g) {
    v = x;
    x *= gamma_factor;
  }
  return g;
}

void SweepConfig::validate() const {
  network.validate();
  if (!(network.direct_coupling != 0.0)) throw InvalidParameter("sweep: V must be non-zero");
  if (gamma_list.empty()) {
    if (!(gamma_factor > 1.0)) throw InvalidParameter("sweep: gamma_factor must be > 1");
    if (gamma_count < 1) throw InvalidParameter("sweep: gamma_count must be >= 1");
    if (!(gamma_start > 0.0)) throw InvalidParameter("sweep: gamma_start must be > 0");
  }
  for (double g : gamma_list) {
    if (!(g > 0.0) || !std::isfinite(g)) throw InvalidParameter("sweep: Gamma values must be finite and > 0");
  }
  if (n_realizations < 1) throw InvalidParameter("sweep: n_realizations must be >= 1");
  if (n_bins < 1) throw InvalidParameter("sweep: n_bins must be >= 1");
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidParameter("sweep: delta must lie in (0, 1/2)");
  if (!(epsilon_budget > 0.0)) throw InvalidParameter("sweep: epsilon_budget must be > 0");
}

double GammaRecord::mean_p() const {
  if (samples.empty()) return std::nan("");
  return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

double GammaRecord::median_p() const { return samples.empty() ? std::nan("") : median(samples); }

namespace {

enum class Status : std::uint8_t { Ok, Degenerate };

struct Outcome {
  Status status = Status::Ok;
  double p = 0.0;
  double delta_s_tilde = 0.0;
  double epsilon = 0.0;
};

Outcome run_realization(const SweepConfig& cfg, double gamma, std::uint64_t seed) {
  const NetworkHamiltonian h = sample_random(cfg.network, seed);
  const SymmetryBlocks blocks = decompose_symmetry(h);
  const double coupling = h.direct_coupling();
  const double onsite = h.onsite_energy();

  DoubletShifts pert;
  try {
    pert = perturbative_shifts(blocks, cfg.network.bulk_scale);
  } catch (const NearDegenerate&) {
    return {Status::Degenerate};
  }
  const SectorDiagnostics plus = sector_diagnostics(blocks, Sector::Plus);
  const SectorDiagnostics minus = sector_diagnostics(blocks, Sector::Minus);
  const DoubletShifts shifts =
      cfg.shift_source == ShiftSource::Exact ? DoubletShifts{plus.exact_shift, minus.exact_shift} : pert;

  Outcome out;
  out.epsilon = std::clamp(1.0 - std::min(plus.overlap, minus.overlap), 0.0, 1.0);
  out.delta_s_tilde = (shifts.s_plus - shifts.s_minus) / (2.0 * coupling);

  double energy = onsite + coupling + shifts.s_plus;
  if (cfg.detuned) {
    const double split = 2.0 * coupling + shifts.s_plus - shifts.s_minus;
    const double centre = onsite + 0.5 * (shifts.s_plus + shifts.s_minus);
    energy = centre;
    if (gamma < std::abs(split)) {
      energy += std::copysign(0.5 * std::sqrt(split * split - gamma * gamma), split);
    }
  }
  const ScatteringSystem sys(h.matrix, ChannelCoupling::symmetric(gamma));
  out.p = std::norm(sys.s_matrix(energy)(0, 1));
  return out;
}

}  // namespace

EnsembleResult run_sweep(const SweepConfig& config, int threads) {
  config.validate();
  EnsembleResult result;
  result.config = config;
  const NetworkParams& net = config.network;
  if (net.link_scale > 0.0 && net.bulk_scale > 0.0 && net.direct_coupling > 0.0 && net.n_sites >= 4) {
    result.nominal_scales = scaled_params_from_model(net.link_scale, net.bulk_scale, net.direct_coupling, net.n_sites);
  }

  const auto gammas = config.gammas();
  const auto n_real = static_cast<std::size_t>(config.n_realizations);
  const std::size_t n_tasks = gammas.size() * n_real;
  std::vector<Outcome> outcomes(n_tasks);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t gi = t / n_real;
      const std::size_t r = t % n_real;
      const std::uint64_t seed = derive_seed(config.master_seed, {gi, r});
      outcomes[t] = run_realization(config, gammas[gi], seed);
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, n_tasks);
  if (n_threads == 1) {
    work(0, n_tasks);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_tasks + n_threads - 1) / n_threads;
    for (std::size_t w = 0; w < n_threads; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n_tasks, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  const double coupling = net.direct_coupling;
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    GammaRecord rec;
    rec.index = static_cast<int>(gi);
    rec.gamma = gammas[gi];
    rec.gamma_tilde = gammas[gi] / (2.0 * coupling);
    for (std::size_t r = 0; r < n_real; ++r) {
      const Outcome& o = outcomes[gi * n_real + r];
      if (o.status == Status::Degenerate) {
        ++rec.n_rejected_degenerate;
        continue;
      }
      ++rec.n_ok;
      if (o.epsilon > config.epsilon_budget) ++rec.n_eps_violation;
      rec.samples.push_back(o.p);
      rec.delta_s_tilde.push_back(o.delta_s_tilde);
      rec.epsilon.push_back(o.epsilon);
      rec.realization.push_back(r);
    }
    if (!rec.samples.empty()) {
      rec.histogram = make_histogram(rec.samples, static_cast<std::size_t>(config.n_bins), config.delta,
                                     1.0 - config.delta);
      rec.sigma_tilde_empirical = half_interquartile_range(rec.delta_s_tilde);
      rec.s0_tilde_empirical = median(rec.delta_s_tilde);
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

TheoryDistance compare_to_theory(const GammaRecord& record, const ScaledParams& sp, double delta) {
  TheoryDistance d;
  d.gamma_tilde = record.gamma_tilde;
  const Histogram& h = record.histogram;
  if (h.n_bins() == 0) return d;
  const auto masses = efficiency_bin_masses(h.bin_edges, sp, delta);
  const double total = static_cast<double>(h.total());
  double l1 = 0.0;
  for (std::size_t k = 0; k < h.n_bins(); ++k) {
    const double width = h.bin_width(k);
    const double emp_mass = static_cast<double>(h.counts[k]) / total;
    const double theory = masses[k] / width;
    d.theory_density.push_back(theory);
    d.theory_peak = std::max(d.theory_peak, theory);
    d.sup_norm = std::max(d.sup_norm, std::abs(emp_mass / width - theory));
    l1 += std::abs(emp_mass - masses[k]);
  }
  d.total_variation = 0.5 * l1;
  return d;
}

std::vector<TheoryDistance> compare_to_theory(const EnsembleResult& result, const DisorderScales& scales) {
  if (result.records.empty()) throw EmptyInput("compare_to_theory: no records");
  std::vector<TheoryDistance> out;
  for (const auto& rec : result.records) {
    out.push_back(compare_to_theory(rec, ScaledParams{rec.gamma_tilde, scales}, result.config.delta));
  }
  return out;
}

std::vector<TheoryDistance> compare_to_empirical_theory(const EnsembleResult& result) {
  if (result.records.empty()) throw EmptyInput("compare_to_theory: no records");
  std::vector<TheoryDistance> out;
  for (const auto& rec : result.records) {
    if (!(rec.sigma_tilde_empirical > 0.0)) {
      out.push_back(TheoryDistance{rec.gamma_tilde, std::nan(""), std::nan(""), std::nan(""), {}});
      continue;
    }
    const DisorderScales s{rec.sigma_tilde_empirical, rec.s0_tilde_empirical};
    out.push_back(compare_to_theory(rec, ScaledParams{rec.gamma_tilde, s}, result.config.delta));
  }
  return out;
}

std::vector<double> dimer_baseline(const std::vector<double>& gammas, double coupling) {
  std::vector<double> out;
  out.reserve(gammas.size());
  for (double g : gammas) out.push_back(approx_p_at_doublet_energy(0.0, g / (2.0 * coupling)));
  return out;
}

namespace {

SweepConfig fig6_row(int n_sites, double xi, double sigma_tilde) {
  constexpr double kBudget = 0.05;
  SweepConfig c;
  c.network.n_sites = n_sites;
  c.network.bulk_scale = xi;
  c.network.link_scale = chi_at_doublet_bound(xi, n_sites, kBudget);
  c.network.direct_coupling = coupling_for_sigma(c.network.link_scale, xi, sigma_tilde);
  c.network.onsite_energy = 0.0;
  c.network.sample_onsite = true;
  c.epsilon_budget = kBudget;
  // Gamma~ from 0.01 upward by factors of 1.2, ~four decades.
  c.gamma_start = 2.0 * c.network.direct_coupling * 0.01;
  c.gamma_factor = 1.2;
  c.gamma_count = 51;
  c.n_realizations = 10000;
  c.n_bins = 50;
  return c;
}

SweepConfig fig7_row(int n_sites, double xi, double sigma_tilde) {
  SweepConfig c = fig6_row(n_sites, xi, sigma_tilde);
  const double v2 = 2.0 * c.network.direct_coupling;
  c.gamma_list = {0.1 * v2, 1.0 * v2, 10.0 * v2};
  return c;
}

}  // namespace

std::optional<SweepConfig> sweep_preset(std::string_view name) {
  if (name == "fig6-top") return fig6_row(8, 20.0, 0.1);
  if (name == "fig6-middle") return fig6_row(8, 50.0, 1.0);
  if (name == "fig6-bottom") return fig6_row(10, 150.0, 10.0);
  if (name == "fig7") return fig7_row(8, 50.0, 1.0);
  if (name == "fig7-bottom") return fig7_row(10, 150.0, 10.0);
  return std::nullopt;
}

std::vector<std::string> sweep_preset_names() {
  return {"fig6-top", "fig6-middle", "fig6-bottom", "fig7", "fig7-bottom"};
}

void to_json(nlohmann::json& j, const SweepConfig& c) {
  j = nlohmann::json{{"network", c.network},
                     {"gamma_start", c.gamma_start},
                     {"gamma_factor", c.gamma_factor},
                     {"gamma_count", c.gamma_count},
                     {"gamma_list", c.gamma_list},
                     {"gammas", c.gammas()},
                     {"n_realizations", c.n_realizations},
                     {"epsilon_budget", c.epsilon_budget},
                     {"master_seed", c.master_seed},
                     {"n_bins", c.n_bins},
                     {"delta", c.delta},
                     {"shift_source", std::string(to_string(c.shift_source))},
                     {"detuned", c.detuned}};
}

void from_json(const nlohmann::json& j, SweepConfig& c) {
  c.network = j.at("network").get<NetworkParams>();
  c.gamma_start = j.value("gamma_start", c.gamma_start);
  c.gamma_factor = j.value("gamma_factor", c.gamma_factor);
  c.gamma_count = j.value("gamma_count", c.gamma_count);
  c.gamma_list = j.value("gamma_list", std::vector<double>{});
  c.n_realizations = j.value("n_realizations", c.n_realizations);
  c.epsilon_budget = j.value("epsilon_budget", c.epsilon_budget);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.n_bins = j.value("n_bins", c.n_bins);
  c.delta = j.value("delta", c.delta);
  c.shift_source = shift_source_from_string(j.value("shift_source", std::string("exact")));
  c.detuned = j.value("detuned", false);
}

namespace {

std::string indexed_name(const char* stem, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_g%03d.csv", stem, index);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

std::string csv_number(double x) { return std::isnan(x) ? std::string{} : format_double(x); }

}  // namespace

nlohmann::json write_sweep_artifacts(const EnsembleResult& result, const std::filesystem::path& dir,
                                     const ArtifactOptions& options) {
  std::filesystem::create_directories(dir);
  const auto empirical = compare_to_empirical_theory(result);
  std::optional<std::vector<TheoryDistance>> nominal;
  if (result.nominal_scales) nominal = compare_to_theory(result, *result.nominal_scales);

  std::vector<double> gammas;
  for (const auto& r : result.records) gammas.push_back(r.gamma);
  const auto dimer = dimer_baseline(gammas, result.config.network.direct_coupling);

  nlohmann::json manifest;
  manifest["config"] = result.config;
  manifest["git_describe"] = git_describe();
  manifest["started_at"] = options.started_at ? nlohmann::json(*options.started_at) : nlohmann::json(nullptr);
  if (result.nominal_scales) {
    manifest["scales"] = {{"sigma_tilde", result.nominal_scales->sigma_tilde},
                          {"s0_tilde", result.nominal_scales->s0_tilde}};
  } else {
    manifest["scales"] = nullptr;
  }
  manifest["per_gamma"] = nlohmann::json::array();

  auto summary = open_output(dir / "summary.csv");
  summary << "gamma,gamma_tilde,mean_p,median_p,tv_distance,tv_distance_empirical,sup_norm,n_ok,"
             "n_rejected_degenerate,n_eps_violation,sigma_tilde_empirical,dimer_p\n";

  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const GammaRecord& rec = result.records[i];
    const std::string samples_name = indexed_name("samples", rec.index);
    const std::string hist_name = indexed_name("hist", rec.index);

    auto samples = open_output(dir / samples_name);
    samples << "realization,p,delta_s_tilde,epsilon\n";
    for (std::size_t k = 0; k < rec.samples.size(); ++k) {
      samples << rec.realization[k] << ',' << format_double(rec.samples[k]) << ','
              << format_double(rec.delta_s_tilde[k]) << ',' << format_double(rec.epsilon[k]) << '\n';
    }

    auto hist = open_output(dir / hist_name);
    hist << "bin_center,count,density,theory_density,theory_density_empirical\n";
    const Histogram& h = rec.histogram;
    const double total = static_cast<double>(h.total());
    for (std::size_t k = 0; k < h.n_bins(); ++k) {
      const double density = static_cast<double>(h.counts[k]) / (total * h.bin_width(k));
      const double th = nominal ? (*nominal)[i].theory_density[k] : std::nan("");
      const double th_emp = empirical[i].theory_density.empty() ? std::nan("") : empirical[i].theory_density[k];
      hist << format_double(h.bin_center(k)) << ',' << h.counts[k] << ',' << format_double(density) << ','
           << csv_number(th) << ',' << csv_number(th_emp) << '\n';
    }

    const double tv = nominal ? (*nominal)[i].total_variation : std::nan("");
    const double sup = nominal ? (*nominal)[i].sup_norm : std::nan("");
    summary << format_double(rec.gamma) << ',' << format_double(rec.gamma_tilde) << ',' << csv_number(rec.mean_p())
            << ',' << csv_number(rec.median_p()) << ',' << csv_number(tv) << ','
            << csv_number(empirical[i].total_variation) << ',' << csv_number(sup) << ',' << rec.n_ok << ','
            << rec.n_rejected_degenerate << ',' << rec.n_eps_violation << ','
            << format_double(rec.sigma_tilde_empirical) << ',' << format_double(dimer[i]) << '\n';

    auto nullable = [](double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); };
    manifest["per_gamma"].push_back({{"gamma", rec.gamma},
                                     {"gamma_tilde", rec.gamma_tilde},
                                     {"files", {{"samples", samples_name}, {"histogram", hist_name}}},
                                     {"n_ok", rec.n_ok},
                                     {"n_rejected_degenerate", rec.n_rejected_degenerate},
                                     {"n_eps_violation", rec.n_eps_violation},
                                     {"sigma_tilde_empirical", rec.sigma_tilde_empirical},
                                     {"s0_tilde_empirical", rec.s0_tilde_empirical},
                                     {"mean_p", nullable(rec.mean_p())},
                                     {"median_p", nullable(rec.median_p())},
                                     {"tv_distance", nullable(tv)},
                                     {"tv_distance_empirical", nullable(empirical[i].total_variation)}});
  }

  auto mf = open_output(dir / "manifest.json");
  mf << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace netscat
