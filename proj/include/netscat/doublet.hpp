#ifndef NETSCAT_DOUBLET_HPP
#define NETSCAT_DOUBLET_HPP

#include <string_view>
#include <vector>

#include <json.hpp>

#include "netscat/network.hpp"

namespace netscat {

// Relation between the channel rate Gamma and the doublet splitting |2V+ds|.
enum class Regime {
  Separated,    // Gamma <  |2V + ds|: two unit-height resonances
  Merged,       // Gamma == |2V + ds|
  Overlapping,  // Gamma >  |2V + ds|: one suppressed peak
};

std::string_view to_string(Regime r);

struct DoubletShifts {
  double s_plus = 0.0;
  double s_minus = 0.0;
};

struct DoubletAnalysis {
  double epsilon = 0.0;  // 1 - min over sectors of the best doublet overlap
  double s_plus = 0.0;
  double s_minus = 0.0;
  double delta_s = 0.0;  // s_plus - s_minus
  double s_bar = 0.0;    // (s_plus + s_minus) / 2
  std::vector<double> resonance_energies;
  Regime regime = Regime::Separated;

  static DoubletAnalysis from_shifts(DoubletShifts shifts, double onsite, double coupling,
                                     double gamma, double epsilon = 0.0);
};

// Closed-system data of one symmetry sector: the eigenvector with the largest
// weight on the doublet state, that weight, and the exact level shift of the
// corresponding eigenvalue relative to E' +- V.
struct SectorDiagnostics {
  double overlap = 1.0;
  double exact_shift = 0.0;
};

SectorDiagnostics sector_diagnostics(const SymmetryBlocks& blocks, Sector sector);

// Largest |<eta_i|+->|^2 over the closed-system eigenvectors of one sector.
double doublet_overlap(const SymmetryBlocks& blocks, Sector sector);

// epsilon = 1 - min(max_i |<eta_i|+>|^2, max_i |<eta_i|->|^2).
double doublet_quality(const SymmetryBlocks& blocks);
double doublet_quality(const NetworkHamiltonian& h);

// Relative denominator threshold below which a shift is declared divergent.
inline constexpr double kNearDegenerate = 1e-9;

// Lowest-order level shifts
//   s+- = sum_i |<V+-|psi+-_i>|^2 / (E' +- V - e+-_i).
// `energy_scale` sets the NearDegenerate threshold (typically xi); zero picks
// the largest entry of the blocks.
DoubletShifts perturbative_shifts(const SymmetryBlocks& blocks, double energy_scale = 0.0);

// Shifts read off the exact closed-system doublet eigenvalues.
DoubletShifts exact_doublet_shifts(const SymmetryBlocks& blocks);

Regime classify_regime(double coupling, double delta_s, double gamma);

// Full lowest-order analysis of one realization at channel rate `gamma`.
DoubletAnalysis analyze_doublet(const NetworkHamiltonian& h, double gamma, double energy_scale = 0.0);

// Two-pole approximation of S_in,out(E).
Complex approx_s_element(const DoubletAnalysis& a, double onsite, double coupling, double gamma,
                         double energy);

// Closed-form |S_in,out|^2 of the two-pole approximation.
double approx_transfer_probability(const DoubletAnalysis& a, double onsite, double coupling,
                                   double gamma, double energy);

// Im{ S^{-1} dS/dE } of the two-pole approximation, differentiated
// analytically. Throws VanishingAmplitude where the element vanishes.
double approx_dwell_time(const DoubletAnalysis& a, double onsite, double coupling, double gamma,
                         double energy);

// Energies maximizing the approximate transfer probability, ascending.
std::vector<double> resonance_energies(const DoubletAnalysis& a, double onsite, double coupling,
                                       double gamma);

void to_json(nlohmann::json& j, const DoubletAnalysis& a);

}  // namespace netscat

#endif  // NETSCAT_DOUBLET_HPP
