#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#ifdef NETSCAT_HAVE_BOOST_QUADRATURE
#include <boost/math/quadrature/tanh_sinh.hpp>
#endif

#include "netscat/errors.hpp"
#include "netscat/rng.hpp"
#include "netscat/statistics.hpp"

using namespace netscat;
using std::numbers::pi;

namespace {

std::vector<double> cauchy_samples(std::size_t n, double sigma, double s0, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = sample_cauchy(rng, sigma, s0);
  return out;
}

// P(p <= q) for p = (1+d)^2 / ((1+d)^2 + g^2/4) with d ~ Cauchy(s0, sigma).
double pushforward_cdf(double q, double g, double sigma, double s0) {
  const double r = 0.5 * g * std::sqrt(q / (1.0 - q));
  return cauchy_cdf(-1.0 + r, sigma, s0) - cauchy_cdf(-1.0 - r, sigma, s0);
}

}  // namespace

TEST_CASE("cauchy_pdf: mode and normalization") {
  CHECK(cauchy_pdf(0.3, 2.0, 0.3) == doctest::Approx(1.0 / (2.0 * pi)));
  const double sigma = 1.7, s0 = -0.4;
  auto f = [&](double x) { return cauchy_pdf(x, sigma, s0); };
  // integrate in the tangent variable to cover [-1e6 sigma, 1e6 sigma]
  const double lim = std::atan(1e6);
  const double total = integrate_adaptive(
      [&](double t) { return f(s0 + sigma * std::tan(t)) * sigma / (std::cos(t) * std::cos(t)); }, -lim, lim,
      1e-12);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
#ifdef NETSCAT_HAVE_BOOST_QUADRATURE
  boost::math::quadrature::tanh_sinh<double> ts;
  const double lo = ts.integrate(f, s0 - 1e6 * sigma, s0);
  const double hi = ts.integrate(f, s0, s0 + 1e6 * sigma);
  CHECK(lo + hi == doctest::Approx(1.0).epsilon(1e-4));
#endif
}

TEST_CASE("sample_cauchy: median and KS distance") {
  const std::size_t n = 1000000;
  const double sigma = 0.8, s0 = 0.25;
  auto xs = cauchy_samples(n, sigma, s0, 123);
  const double se = pi * sigma / (2.0 * std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(median(xs) - s0) < 3.0 * se);
  CHECK(half_interquartile_range(xs) == doctest::Approx(sigma).epsilon(0.01));

  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cauchy_cdf(xs[i], sigma, s0);
    ks = std::max({ks, std::abs(c - static_cast<double>(i) / n), std::abs(c - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("efficient_fraction: values, Monte Carlo, monotonicity") {
  CHECK(efficient_fraction(1e-12, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-11));
  const double expect = 1.0 - std::atan(2.0) / pi;
  CHECK(std::abs(efficient_fraction(1.0, 1.0, 0.0) - expect) <= 1e-12);
  CHECK(expect == doctest::Approx(0.6476).epsilon(1e-4));

  const std::size_t n = 1000000;
  const auto xs = cauchy_samples(n, 1.0, 0.0, 99);
  const double hits = static_cast<double>(std::count_if(xs.begin(), xs.end(), [](double d) {
    return 1.0 < std::abs(1.0 + d);
  }));
  const double se = std::sqrt(expect * (1 - expect) / n);
  CHECK(std::abs(hits / n - expect) < 3 * se);

  for (double sigma : {0.1, 1.0, 10.0}) {
    double prev = 1.0;
    for (double g = 1e-3; g < 1e3; g *= 1.1) {
      const double f = efficient_fraction(g, sigma, 0.0);
      CHECK(f <= prev);
      CHECK(f >= 0.0);
      prev = f;
    }
    // crossing at sqrt(1 + sigma^2), of the order 1 + sigma
    const double mid = efficient_fraction_midpoint(sigma, 0.0);
    CHECK(mid == doctest::Approx(std::sqrt(1 + sigma * sigma)).epsilon(1e-12));
    CHECK(mid > 0.5 * (1 + sigma));
    CHECK(mid < 2.0 * (1 + sigma));
  }
  CHECK_THROWS_AS(efficient_fraction(1.0, 0.0, 0.0), InvalidParameter);
}

TEST_CASE("approx_p_at_doublet_energy") {
  CHECK(approx_p_at_doublet_energy(0.0, 2.0) == doctest::Approx(0.5));
  CHECK(approx_p_at_doublet_energy(0.3, 1e-9) == doctest::Approx(1.0));
  CHECK(approx_p_at_doublet_energy(-1.0, 1.0) == 0.0);
}

TEST_CASE("efficiency_density: domain, positivity, normalization") {
  CHECK_THROWS_AS(efficiency_density(0.5e-4, 1.0, 1.0, 0.0), OutOfDomain);
  CHECK_THROWS_AS(efficiency_density(1.0, 1.0, 1.0, 0.0), OutOfDomain);
  CHECK_NOTHROW(efficiency_density(1e-4, 1.0, 1.0, 0.0));
  for (double p = 1e-4; p <= 1 - 1e-4; p += 0.01) CHECK(efficiency_density(p, 1.0, 1.0, 0.0) > 0.0);

  const double delta = 1e-4;
  auto f = [&](double p) { return efficiency_density(p, 1.0, 1.0, 0.0, delta); };
  const double total = integrate_adaptive(f, delta, 1 - delta, 1e-12);
  const double exact = pushforward_cdf(1 - delta, 1.0, 1.0, 0.0) - pushforward_cdf(delta, 1.0, 1.0, 0.0);
  CHECK(total == doctest::Approx(exact).epsilon(1e-9));
  // the rest sits beyond the cutoffs: p > 1-delta for |1 + ds~| > sqrt((1-delta)/delta)/2,
  // p < delta for |1 + ds~| < sqrt(delta/(1-delta))/2
  const double r_hi = 0.5 * std::sqrt((1 - delta) / delta);
  const double r_lo = 0.5 * std::sqrt(delta / (1 - delta));
  const double upper = 1.0 - (cauchy_cdf(-1 + r_hi, 1.0, 0.0) - cauchy_cdf(-1 - r_hi, 1.0, 0.0));
  const double lower = cauchy_cdf(-1 + r_lo, 1.0, 0.0) - cauchy_cdf(-1 - r_lo, 1.0, 0.0);
  MESSAGE("mass on [delta, 1-delta]: " << total << ", above: " << upper << ", below: " << lower);
  CHECK(total + upper + lower == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(total > 0.985);
#ifdef NETSCAT_HAVE_BOOST_QUADRATURE
  boost::math::quadrature::tanh_sinh<double> ts;
  CHECK(ts.integrate(f, delta, 1 - delta) == doctest::Approx(exact).epsilon(1e-9));
#endif
}

TEST_CASE("efficiency_density equals the derivative of the pushforward CDF") {
  for (double g : {0.1, 1.0, 10.0}) {
    for (double sigma : {0.1, 1.0, 10.0}) {
      for (double s0 : {0.0, 0.05}) {
        for (double p = 0.02; p < 0.981; p += 0.02) {
          const double h = 1e-6;
          const double num = (pushforward_cdf(p + h, g, sigma, s0) - pushforward_cdf(p - h, g, sigma, s0)) / (2 * h);
          CHECK(efficiency_density(p, g, sigma, s0) == doctest::Approx(num).epsilon(0.01));
        }
      }
    }
  }
}

TEST_CASE("efficiency_density matches a sampled pushforward histogram") {
  const std::size_t bins = 100;
  const double g = 1.0, sigma = 1.0, delta = 1e-4;
  const std::vector<double> edges = make_histogram(std::vector<double>{0.5}, bins, delta, 1 - delta).bin_edges;
  const auto masses = efficiency_bin_masses(edges, {g, {sigma, 0.0}}, delta);
  for (std::size_t n : {std::size_t{1000000}, std::size_t{10000000}}) {
    const auto ds = cauchy_samples(n, sigma, 0.0, 2024);
    std::vector<double> ps(n);
    std::transform(ds.begin(), ds.end(), ps.begin(), [&](double d) { return approx_p_at_doublet_energy(d, g); });
    const auto hist = make_histogram(ps, bins, delta, 1 - delta);
    double sup = 0.0, worst_z = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double w = hist.bin_width(k);
      const double emp = static_cast<double>(hist.counts[k]) / (static_cast<double>(n) * w);
      const double diff = std::abs(emp - masses[k] / w);
      sup = std::max(sup, diff);
      worst_z = std::max(worst_z, diff / (std::sqrt(masses[k] * (1 - masses[k]) / n) / w));
    }
    MESSAGE(n << " samples: sup-norm " << sup << ", worst bin " << worst_z << " standard errors");
    CHECK(worst_z < 4.5);
    // near p = 1 the density reaches ~12, so one standard error at 1e6 samples is ~0.03
    if (n >= 10000000) CHECK(sup < 0.05);
  }
}

TEST_CASE("efficiency mass moves from p=1 to p=0 as Gamma~ grows") {
  const auto ds = cauchy_samples(200000, 1.0, 0.0, 31);
  auto quantiles = [&](double g) {
    std::vector<double> ps;
    for (double d : ds) ps.push_back(approx_p_at_doublet_energy(d, g));
    return std::pair{quantile(ps, 0.25), quantile(ps, 0.75)};
  };
  const auto small = quantiles(0.01);
  CHECK(small.first > 0.99);
  const auto large = quantiles(100.0);
  CHECK(large.second < 0.05);
}

TEST_CASE("model parameter maps") {
  const auto s = scaled_params_from_model(1.0, 10.0, 0.01, 10);
  CHECK(s.sigma_tilde == doctest::Approx(10.0));
  CHECK(s.s0_tilde == doctest::Approx(0.005));
  CHECK_THROWS_AS(scaled_params_from_model(0.0, 10.0, 0.01, 10), InvalidParameter);

  CHECK(dominant_doublet_measure(1.0, 20.0, 8) == doctest::Approx(0.0440).epsilon(1e-3));
  CHECK(dominant_doublet_bound(1.0, 20.0, 8, 0.05));
  CHECK(dominant_doublet_bound(0.0, 20.0, 8, 1e-9));
  CHECK(!dominant_doublet_bound(2.0, 20.0, 8, 0.05));

  const double chi = chi_at_doublet_bound(20.0, 8, 0.05);
  CHECK(chi == doctest::Approx(0.05 * 20.0 / (std::pow(2.0 / pi, 1.5) * std::sqrt(3.0))));
  CHECK(chi == doctest::Approx(1.137).epsilon(1e-3));
  const double v = coupling_for_sigma(chi, 20.0, 0.1);
  CHECK(scaled_params_from_model(chi, 20.0, v, 8).sigma_tilde == doctest::Approx(0.1));
}

TEST_CASE("histogram basics") {
  CHECK_THROWS_AS(make_histogram(std::vector<double>{}, 10, 0, 1), EmptyInput);
  CHECK_THROWS_AS(make_histogram(std::vector<double>{0.5}, 10, 1, 0), InvalidParameter);

  const std::vector<double> same(100, 0.37);
  const auto one = make_histogram(same, 10, 0, 1);
  CHECK(std::count_if(one.counts.begin(), one.counts.end(), [](auto c) { return c > 0; }) == 1);
  CHECK(one.counts[3] == 100);

  RandomStream rng(4);
  std::vector<double> u(200000);
  for (auto& x : u) x = rng.uniform_open();
  u.push_back(-1.0);
  u.push_back(2.0);
  u.push_back(1.0);
  const auto flat = make_histogram(u, 20, 0, 1);
  CHECK(flat.underflow == 1);
  CHECK(flat.overflow == 1);
  CHECK(flat.in_range() == 200001);
  CHECK(flat.counts.back() >= 1);
  double integral = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    integral += flat.normalized_density[k] * flat.bin_width(k);
    CHECK(flat.normalized_density[k] == doctest::Approx(1.0).epsilon(0.03));
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram of Cauchy samples follows the pdf") {
  const auto xs = cauchy_samples(400000, 1.0, 0.0, 8);
  const auto h = make_histogram(xs, 40, -2, 2);
  const double frac = static_cast<double>(h.in_range()) / xs.size();
  for (std::size_t k = 5; k < 35; ++k) {
    const double a = h.bin_edges[k], b = h.bin_edges[k + 1];
    const double theory = (cauchy_cdf(b, 1, 0) - cauchy_cdf(a, 1, 0)) / (b - a) / frac;
    CHECK(std::abs(h.normalized_density[k] - theory) < 0.02);
  }
}

TEST_CASE("histogram merge is associative") {
  const auto xs = cauchy_samples(3000, 0.3, 0.5, 1);
  std::span<const double> all(xs);
  auto part = [&](std::size_t a, std::size_t b) { return make_histogram(all.subspan(a, b - a), 16, 0, 1); };
  auto left = part(0, 1000);
  left.merge(part(1000, 2000));
  left.merge(part(2000, 3000));
  auto right = part(1000, 2000);
  right.merge(part(2000, 3000));
  auto first = part(0, 1000);
  first.merge(right);
  const auto whole = make_histogram(all, 16, 0, 1);
  CHECK(left.counts == whole.counts);
  CHECK(first.counts == whole.counts);
  CHECK(first.underflow == whole.underflow);
  CHECK(first.overflow == whole.overflow);
  CHECK(first.normalized_density == whole.normalized_density);
  CHECK_THROWS_AS(first.merge(make_histogram(all, 8, 0, 1)), DimensionMismatch);
}

TEST_CASE("quantiles and CSV") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(quantile({0.0, 10.0}, 0.25) == 2.5);
  CHECK(half_interquartile_range({0.0, 1.0, 2.0, 3.0, 4.0}) == 1.0);
  CHECK_THROWS_AS(median({}), EmptyInput);

  const auto h = make_histogram(std::vector<double>{0.1, 0.6, 0.7}, 2, 0, 1);
  std::ostringstream os;
  write_histogram_csv(os, h);
  CHECK(os.str() == "bin_center,density\n0.25,0.6666666666666666\n0.75,1.3333333333333333\n");
}
