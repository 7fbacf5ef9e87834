#include "netscat/statistics.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "netscat/errors.hpp"
#include "netscat/format.hpp"

namespace netscat {

using std::numbers::pi;

void DisorderScales::validate() const {
  if (!(sigma_tilde > 0.0) || !std::isfinite(sigma_tilde) || !std::isfinite(s0_tilde)) {
    throw InvalidParameter("scaled parameters: sigma~ must be finite and > 0, s0~ finite");
  }
}

void ScaledParams::validate() const {
  scales.validate();
  if (!(gamma_tilde > 0.0) || !std::isfinite(gamma_tilde)) {
    throw InvalidParameter("scaled parameters: Gamma~ must be finite and > 0");
  }
}

double cauchy_pdf(double delta_s_tilde, double sigma_tilde, double s0_tilde) {
  const double d = delta_s_tilde - s0_tilde;
  return sigma_tilde / (pi * (sigma_tilde * sigma_tilde + d * d));
}

double cauchy_cdf(double delta_s_tilde, double sigma_tilde, double s0_tilde) {
  return 0.5 + std::atan((delta_s_tilde - s0_tilde) / sigma_tilde) / pi;
}

double sample_cauchy(RandomStream& rng, double sigma_tilde, double s0_tilde) {
  return s0_tilde + sigma_tilde * std::tan(pi * (rng.uniform_open() - 0.5));
}

double efficient_fraction(double gamma_tilde, double sigma_tilde, double s0_tilde) {
  if (!(sigma_tilde > 0.0)) throw InvalidParameter("efficient_fraction: sigma~ must be > 0");
  return 1.0 - std::atan((gamma_tilde - 1.0 - s0_tilde) / sigma_tilde) / pi -
         std::atan((gamma_tilde + 1.0 + s0_tilde) / sigma_tilde) / pi;
}

double efficient_fraction_midpoint(double sigma_tilde, double s0_tilde) {
  double lo = 0.0;
  double hi = 1.0;
  while (efficient_fraction(hi, sigma_tilde, s0_tilde) > 0.5) {
    hi *= 2.0;
    if (hi > 1e12) throw ConvergenceFailure("efficient_fraction_midpoint: no crossing found");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (efficient_fraction(mid, sigma_tilde, s0_tilde) > 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double approx_p_at_doublet_energy(double delta_s_tilde, double gamma_tilde) {
  const double y2 = (1.0 + delta_s_tilde) * (1.0 + delta_s_tilde);
  return y2 / (y2 + gamma_tilde * gamma_tilde / 4.0);
}

double efficiency_density(double p, double gamma_tilde, double sigma_tilde, double s0_tilde, double delta) {
  if (!(sigma_tilde > 0.0)) throw InvalidParameter("efficiency_density: sigma~ must be > 0");
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidParameter("efficiency_density: delta must lie in (0, 1/2)");
  if (!(p >= delta && p <= 1.0 - delta)) {
    throw OutOfDomain("efficiency_density: p = " + std::to_string(p) + " outside [delta, 1 - delta]");
  }
  const double root = 0.5 * gamma_tilde * std::sqrt(p / (1.0 - p));
  const double s2 = sigma_tilde * sigma_tilde;
  const double a = 1.0 + s0_tilde - root;
  const double b = 1.0 + s0_tilde + root;
  const double jacobian = gamma_tilde / (4.0 * pi * std::sqrt(p * (1.0 - p) * (1.0 - p) * (1.0 - p)));
  return jacobian * (sigma_tilde / (s2 + a * a) + sigma_tilde / (s2 + b * b));
}

DisorderScales scaled_params_from_model(double chi, double xi, double coupling, int n_sites) {
  if (!(xi > 0.0) || !(coupling > 0.0)) {
    throw InvalidParameter("scaled_params_from_model: xi and V must be > 0");
  }
  if (n_sites < 4 || n_sites % 2 != 0) {
    throw InvalidParameter("scaled_params_from_model: need an even number of sites >= 4");
  }
  DisorderScales s{chi * chi / (coupling * xi), chi * chi / (2.0 * xi * xi)};
  if (!(s.sigma_tilde > 0.0)) {
    throw InvalidParameter("scaled_params_from_model: chi = 0 leaves no shift fluctuations");
  }
  return s;
}

double dominant_doublet_measure(double chi, double xi, int n_sites) {
  if (!(xi > 0.0)) throw InvalidParameter("dominant_doublet_measure: xi must be > 0");
  return std::pow(2.0 / pi, 1.5) * std::sqrt(n_sites / 2.0 - 1.0) * chi / xi;
}

bool dominant_doublet_bound(double chi, double xi, int n_sites, double epsilon_budget) {
  return dominant_doublet_measure(chi, xi, n_sites) < epsilon_budget;
}

double chi_at_doublet_bound(double xi, int n_sites, double epsilon_budget) {
  return epsilon_budget / dominant_doublet_measure(1.0, xi, n_sites);
}

double coupling_for_sigma(double chi, double xi, double sigma_tilde) {
  if (!(xi > 0.0) || !(sigma_tilde > 0.0)) {
    throw InvalidParameter("coupling_for_sigma: xi and sigma~ must be > 0");
  }
  return chi * chi / (sigma_tilde * xi);
}

std::uint64_t Histogram::in_range() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void Histogram::renormalize() {
  normalized_density.assign(counts.size(), 0.0);
  const auto n = in_range();
  if (n == 0) return;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    normalized_density[k] = static_cast<double>(counts[k]) / (static_cast<double>(n) * bin_width(k));
  }
}

void Histogram::merge(const Histogram& other) {
  if (other.bin_edges != bin_edges) throw DimensionMismatch("Histogram::merge: bin edges differ");
  for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
  underflow += other.underflow;
  overflow += other.overflow;
  renormalize();
}

Histogram make_histogram(std::span<const double> samples, std::size_t n_bins, double lo, double hi) {
  if (samples.empty()) throw EmptyInput("make_histogram: no samples");
  if (n_bins < 1) throw InvalidParameter("make_histogram: need at least one bin");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidParameter("make_histogram: invalid range");
  }
  Histogram h;
  h.bin_edges.resize(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t k = 0; k <= n_bins; ++k) h.bin_edges[k] = lo + width * static_cast<double>(k);
  h.bin_edges.back() = hi;
  h.counts.assign(n_bins, 0);
  for (const double x : samples) {
    if (std::isnan(x)) throw InvalidParameter("make_histogram: NaN sample");
    if (x < lo) {
      ++h.underflow;
    } else if (x > hi) {
      ++h.overflow;
    } else {
      auto k = static_cast<std::size_t>((x - lo) / width);
      k = std::min(k, n_bins - 1);
      // Guard against rounding at interior edges.
      while (k > 0 && x < h.bin_edges[k]) --k;
      while (k + 1 < n_bins && x >= h.bin_edges[k + 1]) ++k;
      ++h.counts[k];
    }
  }
  h.renormalize();
  return h;
}

std::vector<double> efficiency_bin_masses(const std::vector<double>& bin_edges, const ScaledParams& sp,
                                          double delta) {
  sp.validate();
  std::vector<double> masses;
  masses.reserve(bin_edges.size() > 0 ? bin_edges.size() - 1 : 0);
  auto f = [&](double p) {
    return efficiency_density(p, sp.gamma_tilde, sp.scales.sigma_tilde, sp.scales.s0_tilde, delta);
  };
  for (std::size_t k = 0; k + 1 < bin_edges.size(); ++k) {
    const double a = std::max(bin_edges[k], delta);
    const double b = std::min(bin_edges[k + 1], 1.0 - delta);
    masses.push_back(b > a ? integrate_adaptive(f, a, b, 1e-12) : 0.0);
  }
  return masses;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyInput("quantile: no values");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double half_interquartile_range(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("half_interquartile_range: no values");
  std::sort(values.begin(), values.end());
  return 0.5 * (quantile(values, 0.75) - quantile(values, 0.25));
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_center,density\n";
  for (std::size_t k = 0; k < h.n_bins(); ++k) {
    os << format_double(h.bin_center(k)) << ',' << format_double(h.normalized_density[k]) << '\n';
  }
}

}  // namespace netscat
