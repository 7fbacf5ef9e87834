#include "netscat/doublet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "netscat/scattering.hpp"

namespace netscat {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Separated:
      return "separated";
    case Regime::Merged:
      return "merged";
    case Regime::Overlapping:
      return "overlapping";
  }
  return "unknown";
}

SectorDiagnostics sector_diagnostics(const SymmetryBlocks& blocks, Sector sector) {
  const RealMatrix s = sector_matrix(blocks, sector);
  if (s.rows() == 1) return {};
  const auto es = eig_sym(s);
  Index best = 0;
  const double overlap = es.eigenvectors.row(0).cwiseAbs2().maxCoeff(&best);
  return {overlap, es.eigenvalues(best) - s(0, 0)};
}

double doublet_overlap(const SymmetryBlocks& blocks, Sector sector) {
  return sector_diagnostics(blocks, sector).overlap;
}

DoubletShifts exact_doublet_shifts(const SymmetryBlocks& blocks) {
  return {sector_diagnostics(blocks, Sector::Plus).exact_shift,
          sector_diagnostics(blocks, Sector::Minus).exact_shift};
}

double doublet_quality(const SymmetryBlocks& blocks) {
  const double best = std::min(doublet_overlap(blocks, Sector::Plus), doublet_overlap(blocks, Sector::Minus));
  return std::clamp(1.0 - best, 0.0, 1.0);
}

double doublet_quality(const NetworkHamiltonian& h) { return doublet_quality(decompose_symmetry(h)); }

namespace {

double sector_shift(double doublet_energy, const RealVector& coupling, const RealMatrix& sub,
                    double threshold, const char* label) {
  if (sub.rows() == 0) return 0.0;
  const auto es = eig_sym(sub);
  const RealVector weights = (es.eigenvectors.transpose() * coupling).cwiseAbs2();
  double s = 0.0;
  for (Index i = 0; i < es.size(); ++i) {
    const double denom = doublet_energy - es.eigenvalues(i);
    if (std::abs(denom) < threshold) {
      throw NearDegenerate(std::string("perturbative_shifts: doublet level ") + label +
                           " within " + std::to_string(std::abs(denom)) + " of bulk level " +
                           std::to_string(es.eigenvalues(i)));
    }
    s += weights(i) / denom;
  }
  return s;
}

}  // namespace

DoubletShifts perturbative_shifts(const SymmetryBlocks& blocks, double energy_scale) {
  if (energy_scale <= 0.0) {
    energy_scale = std::max({std::abs(blocks.plus_energy), std::abs(blocks.minus_energy),
                             max_abs(blocks.h_plus), max_abs(blocks.h_minus), max_abs(blocks.v_plus),
                             max_abs(blocks.v_minus)});
    if (energy_scale <= 0.0) energy_scale = 1.0;
  }
  const double threshold = kNearDegenerate * energy_scale;
  return {sector_shift(blocks.plus_energy, blocks.v_plus, blocks.h_plus, threshold, "+"),
          sector_shift(blocks.minus_energy, blocks.v_minus, blocks.h_minus, threshold, "-")};
}

Regime classify_regime(double coupling, double delta_s, double gamma) {
  const double splitting = std::abs(2.0 * coupling + delta_s);
  if (gamma < splitting) return Regime::Separated;
  if (gamma == splitting) return Regime::Merged;
  return Regime::Overlapping;
}

DoubletAnalysis DoubletAnalysis::from_shifts(DoubletShifts shifts, double onsite, double coupling,
                                             double gamma, double epsilon) {
  DoubletAnalysis a;
  a.epsilon = epsilon;
  a.s_plus = shifts.s_plus;
  a.s_minus = shifts.s_minus;
  a.delta_s = shifts.s_plus - shifts.s_minus;
  a.s_bar = 0.5 * (shifts.s_plus + shifts.s_minus);
  a.regime = classify_regime(coupling, a.delta_s, gamma);
  a.resonance_energies = netscat::resonance_energies(a, onsite, coupling, gamma);
  return a;
}

DoubletAnalysis analyze_doublet(const NetworkHamiltonian& h, double gamma, double energy_scale) {
  const SymmetryBlocks blocks = decompose_symmetry(h);
  return DoubletAnalysis::from_shifts(perturbative_shifts(blocks, energy_scale), h.onsite_energy(),
                                      h.direct_coupling(), gamma, doublet_quality(blocks));
}

namespace {

struct Poles {
  Complex plus;
  Complex minus;
};

Poles doublet_poles(const DoubletAnalysis& a, double onsite, double coupling, double gamma) {
  const Complex width(0.0, -gamma / 2.0);
  return {onsite + coupling + a.s_plus + width, onsite - coupling + a.s_minus + width};
}

}  // namespace

Complex approx_s_element(const DoubletAnalysis& a, double onsite, double coupling, double gamma,
                         double energy) {
  const Poles p = doublet_poles(a, onsite, coupling, gamma);
  return Complex(0.0, -gamma / 2.0) * (1.0 / (energy - p.plus) - 1.0 / (energy - p.minus));
}

double approx_transfer_probability(const DoubletAnalysis& a, double onsite, double coupling,
                                   double gamma, double energy) {
  const double g2 = gamma * gamma / 4.0;
  const double split = 2.0 * coupling + a.delta_s;
  const double dm = onsite - coupling + a.s_minus - energy;
  const double dp = onsite + coupling + a.s_plus - energy;
  return g2 * split * split / ((dm * dm + g2) * (dp * dp + g2));
}

double approx_dwell_time(const DoubletAnalysis& a, double onsite, double coupling, double gamma,
                         double energy) {
  const Poles p = doublet_poles(a, onsite, coupling, gamma);
  const Complex prefactor(0.0, -gamma / 2.0);
  const Complex rp = 1.0 / (energy - p.plus);
  const Complex rm = 1.0 / (energy - p.minus);
  const Complex s = prefactor * (rp - rm);
  if (!(std::abs(s) > kVanishingAmplitude)) {
    throw VanishingAmplitude("approx_dwell_time: two-pole amplitude vanishes");
  }
  const Complex ds = prefactor * (rm * rm - rp * rp);
  return (ds / s).imag();
}

std::vector<double> resonance_energies(const DoubletAnalysis& a, double onsite, double coupling,
                                       double gamma) {
  const double split = 2.0 * coupling + a.delta_s;
  const double centre = onsite + a.s_bar;
  if (gamma >= std::abs(split)) return {centre};
  const double half = 0.5 * std::sqrt(split * split - gamma * gamma);
  return {centre - half, centre + half};
}

void to_json(nlohmann::json& j, const DoubletAnalysis& a) {
  j = nlohmann::json{{"epsilon", a.epsilon},
                     {"s_plus", a.s_plus},
                     {"s_minus", a.s_minus},
                     {"delta_s", a.delta_s},
                     {"s_bar", a.s_bar},
                     {"regime", std::string(to_string(a.regime))},
                     {"resonance_energies", a.resonance_energies}};
}

}  // namespace netscat
