#ifndef NETSCAT_STATISTICS_HPP
#define NETSCAT_STATISTICS_HPP

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "netscat/rng.hpp"

namespace netscat {

// Disorder-controlled width and centre of the relative-shift distribution,
// both in units of 2V.
struct DisorderScales {
  double sigma_tilde = 1.0;
  double s0_tilde = 0.0;

  void validate() const;
};

struct ScaledParams {
  double gamma_tilde = 1.0;  // Gamma / 2V
  DisorderScales scales;

  void validate() const;
};

// Lower/upper cutoff of the transfer-efficiency density, which diverges
// (integrably) at p = 0 and p = 1.
inline constexpr double kDefaultEdgeCutoff = 1e-4;

// Cauchy density of the scaled relative shift ds~.
double cauchy_pdf(double delta_s_tilde, double sigma_tilde, double s0_tilde);
double cauchy_cdf(double delta_s_tilde, double sigma_tilde, double s0_tilde);

// Inverse-CDF draw.
double sample_cauchy(RandomStream& rng, double sigma_tilde, double s0_tilde);

// Probability over disorder that Gamma~ < |1 + ds~|.
double efficient_fraction(double gamma_tilde, double sigma_tilde, double s0_tilde);

// Gamma~ at which efficient_fraction drops to 1/2 (bisection; the fraction is
// decreasing in Gamma~ for s0~ = 0).
double efficient_fraction_midpoint(double sigma_tilde, double s0_tilde);

// Transfer probability at the doublet energies,
// (1+ds~)^2 / ((1+ds~)^2 + Gamma~^2/4).
double approx_p_at_doublet_energy(double delta_s_tilde, double gamma_tilde);

// Density of p induced by Cauchy-distributed ds~. Defined on [delta, 1-delta];
// throws OutOfDomain elsewhere.
double efficiency_density(double p, double gamma_tilde, double sigma_tilde, double s0_tilde,
                          double delta = kDefaultEdgeCutoff);

// sigma~ = chi^2 / (V xi), s0~ = chi^2 / (2 xi^2).
DisorderScales scaled_params_from_model(double chi, double xi, double coupling, int n_sites);

// Left-hand side of the dominant-doublet bound, (2/pi)^{3/2} sqrt(N/2-1) chi/xi.
double dominant_doublet_measure(double chi, double xi, int n_sites);
bool dominant_doublet_bound(double chi, double xi, int n_sites, double epsilon_budget);

// chi that saturates the bound for the given budget.
double chi_at_doublet_bound(double xi, int n_sites, double epsilon_budget);
// V realizing a target sigma~ for given chi, xi.
double coupling_for_sigma(double chi, double xi, double sigma_tilde);

struct Histogram {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;
  std::vector<double> normalized_density;  // counts / (in-range total * width)
  std::uint64_t underflow = 0;             // samples below bin_edges.front()
  std::uint64_t overflow = 0;              // samples above bin_edges.back()

  std::size_t n_bins() const { return counts.size(); }
  std::uint64_t in_range() const;
  std::uint64_t total() const { return in_range() + underflow + overflow; }
  double bin_center(std::size_t k) const { return 0.5 * (bin_edges[k] + bin_edges[k + 1]); }
  double bin_width(std::size_t k) const { return bin_edges[k + 1] - bin_edges[k]; }

  // Adds another histogram with identical edges. Associative and commutative.
  void merge(const Histogram& other);
  void renormalize();
};

Histogram make_histogram(std::span<const double> samples, std::size_t n_bins, double lo, double hi);

// Probability mass of the efficiency density inside each histogram bin,
// obtained by adaptive quadrature.
std::vector<double> efficiency_bin_masses(const std::vector<double>& bin_edges, const ScaledParams& sp,
                                          double delta = kDefaultEdgeCutoff);

// Adaptive Simpson quadrature with absolute tolerance `tol`.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-10, int max_depth = 40);

double median(std::vector<double> values);
// Half the interquartile range; equals the width parameter for Cauchy data.
double half_interquartile_range(std::vector<double> values);
double quantile(std::vector<double> values, double q);

void write_histogram_csv(std::ostream& os, const Histogram& h);

// ---------------------------------------------------------------------------

namespace detail {

template <typename F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <typename F>
double integrate_adaptive(F&& f, double a, double b, double tol, int max_depth) {
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace netscat

#endif  // NETSCAT_STATISTICS_HPP
