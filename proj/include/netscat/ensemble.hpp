#ifndef NETSCAT_ENSEMBLE_HPP
#define NETSCAT_ENSEMBLE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "netscat/network.hpp"
#include "netscat/statistics.hpp"

namespace netscat {

// Where the doublet shift used for the evaluation energy comes from.
enum class ShiftSource {
  Exact,         // eigenvalue of the closed system's doublet eigenvector
  Perturbative,  // lowest-order sum over bulk levels
};

std::string_view to_string(ShiftSource s);
ShiftSource shift_source_from_string(std::string_view s);

struct SweepConfig {
  NetworkParams network;
  double gamma_start = 1.0;
  double gamma_factor = 1.2;
  int gamma_count = 1;
  std::vector<double> gamma_list;  // explicit Gamma values; overrides the geometric grid
  int n_realizations = 10000;
  double epsilon_budget = 0.05;
  std::uint64_t master_seed = 0;
  int n_bins = 50;
  double delta = kDefaultEdgeCutoff;
  ShiftSource shift_source = ShiftSource::Exact;
  bool detuned = false;  // evaluate at the split-resonance optimum instead of E'+V+s+

  std::vector<double> gammas() const;
  void validate() const;
};

struct GammaRecord {
  int index = 0;
  double gamma = 0.0;
  double gamma_tilde = 0.0;
  std::vector<double> samples;        // exact transfer probabilities
  std::vector<double> delta_s_tilde;  // (s+ - s-)/2V per accepted sample
  std::vector<double> epsilon;        // worst-sector doublet deficit per accepted sample
  std::vector<std::uint64_t> realization;
  Histogram histogram;                // on [delta, 1 - delta]
  std::uint64_t n_ok = 0;
  std::uint64_t n_rejected_degenerate = 0;
  std::uint64_t n_eps_violation = 0;  // accepted samples with epsilon > budget
  double sigma_tilde_empirical = 0.0;
  double s0_tilde_empirical = 0.0;

  double mean_p() const;
  double median_p() const;
};

struct EnsembleResult {
  SweepConfig config;
  std::optional<DisorderScales> nominal_scales;  // from chi, xi, V; absent when chi = 0
  std::vector<GammaRecord> records;
};

EnsembleResult run_sweep(const SweepConfig& config, int threads = 1);

struct TheoryDistance {
  double gamma_tilde = 0.0;
  double sup_norm = 0.0;         // max over bins of |histogram density - bin-averaged theory|
  double total_variation = 0.0;  // half the L1 distance of bin masses
  double theory_peak = 0.0;      // max bin-averaged theory density
  std::vector<double> theory_density;
};

// Histogram masses are counts over all samples of the record, so both sides
// measure probability of the same events inside [delta, 1 - delta].
TheoryDistance compare_to_theory(const GammaRecord& record, const ScaledParams& sp, double delta);
std::vector<TheoryDistance> compare_to_theory(const EnsembleResult& result, const DisorderScales& scales);
// Same, with each record's empirical median / half-IQR of delta_s_tilde.
std::vector<TheoryDistance> compare_to_empirical_theory(const EnsembleResult& result);

// Transfer probability of the bare dimer, 1 / (1 + Gamma~^2/4), per Gamma.
std::vector<double> dimer_baseline(const std::vector<double>& gammas, double coupling);

// Named parameter sets: fig6-top, fig6-middle, fig6-bottom, fig7, fig7-bottom.
std::optional<SweepConfig> sweep_preset(std::string_view name);
std::vector<std::string> sweep_preset_names();

void to_json(nlohmann::json& j, const SweepConfig& c);
void from_json(const nlohmann::json& j, SweepConfig& c);

struct ArtifactOptions {
  std::optional<std::string> started_at;  // recorded verbatim; omitted runs stay byte-reproducible
};

// Writes manifest.json, summary.csv, and per-Gamma samples_gNNN.csv /
// hist_gNNN.csv into `dir`. Returns the manifest.
nlohmann::json write_sweep_artifacts(const EnsembleResult& result, const std::filesystem::path& dir,
                                     const ArtifactOptions& options = {});

std::string git_describe();

}  // namespace netscat

#endif  // NETSCAT_ENSEMBLE_HPP
