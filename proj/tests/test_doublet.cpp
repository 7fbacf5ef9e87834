#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "netscat/doublet.hpp"
#include "netscat/network.hpp"
#include "netscat/scattering.hpp"
#include "netscat/statistics.hpp"

using namespace netscat;

namespace {

NetworkHamiltonian dimer(double e, double v) {
  return build_deterministic(NetworkParams{2, e, v, 0.0, 0.0, false}, RealVector(0), RealMatrix(0, 0));
}

NetworkHamiltonian four_site(double e, double v, double a, double b, double c, double d) {
  RealVector vv(2);
  vv << a, b;
  RealMatrix bulk(2, 2);
  bulk << c, d, d, c;
  return build_deterministic(NetworkParams{4, e, v, 0.0, 0.0, false}, vv, bulk);
}

DoubletAnalysis shifted(double sp, double sm, double onsite, double v, double gamma) {
  return DoubletAnalysis::from_shifts({sp, sm}, onsite, v, gamma);
}

// Expanded real form of the two-pole dwell time.
double expanded_tau(double e, double ep, double v, double sp, double sm, double g) {
  const double dm = g * g + 4 * std::pow(ep + sm - v - e, 2);
  const double dp = g * g + 4 * std::pow(ep + sp + v - e, 2);
  const double first = (g * g + 4 * ep * ep + 4 * ep * (sm + sp - 2 * e)) / dm * (4 * g / dp);
  const double second = ((-2 * sm * (v + e) + sm * sm + sp * sp) / dm +
                         2 * (v * (sp + v) - sp * e + e * e) / dm) *
                        (8 * g / dp);
  return first + second;
}

}  // namespace

TEST_CASE("dimer and decoupled doublet: no deficit, no shift") {
  const auto a = analyze_doublet(dimer(0.2, 1.0), 0.5);
  CHECK(a.epsilon == 0.0);
  CHECK(a.s_plus == 0.0);
  CHECK(a.s_minus == 0.0);

  const auto h = four_site(0.0, 1.0, 0.0, 0.0, 0.3, 0.9);
  CHECK(doublet_quality(h) == doctest::Approx(0.0).scale(1.0));
  const auto s = perturbative_shifts(decompose_symmetry(h), 1.0);
  CHECK(s.s_plus == 0.0);
  CHECK(s.s_minus == 0.0);
}

TEST_CASE("perturbative_shifts: one bulk pair by hand") {
  const double e = 0.1, v = 1.0, a = 0.05, b = 0.12, c = -0.4, d = 0.3;
  const auto blocks = decompose_symmetry(four_site(e, v, a, b, c, d));
  const auto s = perturbative_shifts(blocks, 1.0);
  CHECK(s.s_plus == doctest::Approx((a + b) * (a + b) / (e + v - (c + d))));
  CHECK(s.s_minus == doctest::Approx((a - b) * (a - b) / (e - v - (c - d))));
}

TEST_CASE("perturbative_shifts: quadratic in the links") {
  NetworkParams p{8, 0.0, 1.0, 1.0, 0.3, false};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto h = sample_random(p, seed);
    const auto s1 = perturbative_shifts(decompose_symmetry(h), 1.0);
    const auto h2 = build_deterministic(h.params, 2.0 * h.v, h.bulk);
    const auto s2 = perturbative_shifts(decompose_symmetry(h2), 1.0);
    CHECK(s2.s_plus == doctest::Approx(4.0 * s1.s_plus).epsilon(1e-12));
    CHECK(s2.s_minus == doctest::Approx(4.0 * s1.s_minus).epsilon(1e-12));
  }
}

TEST_CASE("perturbative_shifts: near-degenerate denominator") {
  const auto h = four_site(0.0, 1.0, 0.1, 0.2, 0.4, 0.6);  // h_plus = 1 = E' + V
  CHECK_THROWS_AS(perturbative_shifts(decompose_symmetry(h), 1.0), NearDegenerate);
  CHECK_THROWS_AS(analyze_doublet(h, 0.3, 1.0), NearDegenerate);
}

TEST_CASE("exact and perturbative shifts agree for weak links") {
  NetworkParams p{8, 0.0, 1.0, 1.0, 1e-3, false};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto blocks = decompose_symmetry(sample_random(p, seed));
    const auto pert = perturbative_shifts(blocks, 1.0);
    const auto exact = exact_doublet_shifts(blocks);
    CHECK(exact.s_plus == doctest::Approx(pert.s_plus).epsilon(1e-3).scale(1e-9));
    CHECK(exact.s_minus == doctest::Approx(pert.s_minus).epsilon(1e-3).scale(1e-9));
  }
}

TEST_CASE("analysis invariants") {
  NetworkParams p{8, 0.0, 0.5, 5.0, 1.0, true};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto h = sample_random(p, seed);
    for (double g : {0.1, 1.0, 5.0}) {
      DoubletAnalysis a;
      try {
        a = analyze_doublet(h, g, 5.0);
      } catch (const NearDegenerate&) {
        continue;
      }
      CHECK(a.delta_s == a.s_plus - a.s_minus);
      CHECK(a.epsilon >= 0.0);
      CHECK(a.epsilon <= 1.0);
      CHECK((a.regime == Regime::Separated) == (g < std::abs(2 * 0.5 + a.delta_s)));
      CHECK((a.resonance_energies.size() == 2) == (a.regime == Regime::Separated));
    }
  }
}

TEST_CASE("approx_s_element: limits") {
  const auto a = shifted(0.1, -0.05, 0.2, 1.0, 0.0);
  CHECK(std::abs(approx_s_element(a, 0.2, 1.0, 0.0, 0.5)) == 0.0);

  const double g = 0.4;
  const auto b = shifted(0.1, -0.05, 0.2, 1.0, g);
  const double far = 100.0 * (std::abs(2.0 + b.delta_s) + g);
  CHECK(std::abs(approx_s_element(b, 0.2, 1.0, g, 0.2 + far + 2.0)) <= 0.02);
  CHECK(std::abs(approx_s_element(b, 0.2, 1.0, g, 0.2 - far - 2.0)) <= 0.02);
}

TEST_CASE("approx_transfer_probability is |approx_s_element|^2") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double ep = u(eng), v = 0.1 + std::abs(u(eng)), g = 0.01 + std::abs(u(eng));
    const auto a = shifted(0.3 * u(eng), 0.3 * u(eng), ep, v, g);
    const double e = ep + 2.0 * u(eng);
    CHECK(approx_transfer_probability(a, ep, v, g, e) ==
          doctest::Approx(std::norm(approx_s_element(a, ep, v, g, e))).epsilon(1e-12));
  }
}

TEST_CASE("approx_transfer_probability: resonance identities") {
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int separated = 0;
  for (int i = 0; i < 2000; ++i) {
    const double ep = u(eng), v = 0.05 + std::abs(u(eng)), g = 0.01 + 2.0 * std::abs(u(eng));
    const auto a = shifted(0.2 * u(eng), 0.2 * u(eng), ep, v, g);
    const double split = 2 * v + a.delta_s;
    const double centre_p = approx_transfer_probability(a, ep, v, g, ep + a.s_bar);
    CHECK(centre_p == doctest::Approx(4 * g * g * split * split / std::pow(g * g + split * split, 2))
                          .epsilon(1e-12));
    if (a.regime != Regime::Separated) continue;
    ++separated;
    for (double e : a.resonance_energies) {
      CHECK(std::abs(approx_transfer_probability(a, ep, v, g, e) - 1.0) <= 1e-12);
    }
  }
  CHECK(separated > 200);

  const auto d = shifted(0.0, 0.0, 0.0, 1.0, 2.0);
  CHECK(approx_transfer_probability(d, 0.0, 1.0, 2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("centre-energy closed form with a Gamma^2/V^2 prefactor differs from direct substitution") {
  // Gamma^2/V^2 in place of 4 Gamma^2 agrees only when V = 1/2.
  const auto a = shifted(0.1, -0.2, 0.0, 0.8, 0.3);
  const double split = 2 * 0.8 + a.delta_s;
  const double alt = 0.3 * 0.3 / (0.8 * 0.8) * split * split / std::pow(0.09 + split * split, 2);
  const double p = approx_transfer_probability(a, 0.0, 0.8, 0.3, a.s_bar);
  CHECK(p == doctest::Approx(4 * 0.09 * split * split / std::pow(0.09 + split * split, 2)));
  CHECK(std::abs(p - alt) > 1e-3);
  const auto half = shifted(0.1, -0.2, 0.0, 0.5, 0.3);
  const double split2 = 1.0 + half.delta_s;
  CHECK(approx_transfer_probability(half, 0.0, 0.5, 0.3, half.s_bar) ==
        doctest::Approx(0.09 / 0.25 * split2 * split2 / std::pow(0.09 + split2 * split2, 2)));
}

TEST_CASE("approx_dwell_time: split resonances and centre") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double ep = u(eng), v = 0.2 + std::abs(u(eng));
    const auto base = shifted(0.1 * u(eng), 0.1 * u(eng), ep, v, 0.0);
    const double split = std::abs(2 * v + base.delta_s);
    const double g = (0.01 + 0.49 * std::abs(u(eng))) * split;  // Gamma <= split / 2
    const auto a = shifted(base.s_plus, base.s_minus, ep, v, g);
    for (double e : a.resonance_energies) {
      const double tau = approx_dwell_time(a, ep, v, g, e);
      CHECK(tau == doctest::Approx(2.0 / g).epsilon(0.05));
      CHECK(tau > 2.0 / g * (1 - 1e-9));
      CHECK(tau < 4.0 / g);
    }
    CHECK(approx_dwell_time(a, ep, v, g, ep + a.s_bar) ==
          doctest::Approx(4 * g / (g * g + split * split)).epsilon(0.05));
  }
}

TEST_CASE("approx_dwell_time matches finite differences of the two-pole element") {
  std::mt19937_64 eng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double ep = u(eng), v = 0.1 + std::abs(u(eng)), g = 0.05 + std::abs(u(eng));
    const auto a = shifted(0.3 * u(eng), 0.3 * u(eng), ep, v, g);
    const double e = ep + 1.5 * u(eng);
    const double h = 1e-6;
    const Complex s = approx_s_element(a, ep, v, g, e);
    const Complex ds =
        (approx_s_element(a, ep, v, g, e + h) - approx_s_element(a, ep, v, g, e - h)) / (2 * h);
    CHECK(approx_dwell_time(a, ep, v, g, e) == doctest::Approx((ds / s).imag()).epsilon(1e-5));
  }
  const auto zero = shifted(0.0, 0.0, 0.0, 1.0, 0.0);
  CHECK_THROWS_AS(approx_dwell_time(zero, 0.0, 1.0, 0.0, 0.3), VanishingAmplitude);
}

TEST_CASE("expanded dwell-time expression agrees with analytic differentiation") {
  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double v = 0.1 + std::abs(u(eng)), g = 0.05 + std::abs(u(eng)), e = 1.5 * u(eng);
    const double ep = i % 2 ? u(eng) : 0.0;
    const double sp = i % 2 ? 0.3 * u(eng) : 0.0;
    const double sm = i % 2 ? 0.3 * u(eng) : 0.0;
    const auto a = shifted(sp, sm, ep, v, g);
    const double analytic = approx_dwell_time(a, ep, v, g, e);
    worst = std::max(worst, std::abs(expanded_tau(e, ep, v, sp, sm, g) / analytic - 1));
  }
  MESSAGE("expanded vs analytic dwell time, max relative deviation " << worst);
  CHECK(worst < 1e-10);
}

TEST_CASE("resonance energies") {
  const double v = 1.0, g = 1.2;
  const auto d = shifted(0.0, 0.0, 0.0, v, g);
  REQUIRE(d.resonance_energies.size() == 2);
  CHECK(d.resonance_energies[0] == doctest::Approx(-0.5 * std::sqrt(4 * v * v - g * g)));
  CHECK(d.resonance_energies[1] == doctest::Approx(0.5 * std::sqrt(4 * v * v - g * g)));

  const auto m = shifted(0.25, -0.25, 0.3, 1.0, 2.5);  // |2V + ds| = 2.5
  CHECK(m.regime == Regime::Merged);
  REQUIRE(m.resonance_energies.size() == 1);
  CHECK(m.resonance_energies[0] == doctest::Approx(0.3));

  // |2V + ds| = 0.484257 with V = 0.01, Gamma = 0.2
  const auto f = shifted(0.3, 0.3 - (0.484257 - 0.02), 0.0, 0.01, 0.2);
  CHECK(f.regime == Regime::Separated);
  CHECK(f.resonance_energies.size() == 2);
  CHECK(to_string(f.regime) == "separated");
  CHECK(classify_regime(0.01, 0.0, 0.2) == Regime::Overlapping);
}

TEST_CASE("doublet quality under the dominant-doublet bound") {
  const int n = 8, draws = 10000;
  const double xi = 20.0, budget = 0.05;
  const double chi = chi_at_doublet_bound(xi, n, budget);
  NetworkParams p{n, 0.0, 1.0, xi, chi, false};
  std::vector<double> worst;
  double partner_sum = 0.0;
  int within = 0;
  for (int r = 0; r < draws; ++r) {
    const auto blocks = decompose_symmetry(sample_random(p, derive_seed(17, {static_cast<std::uint64_t>(r)})));
    const double e = doublet_quality(blocks);
    worst.push_back(e);
    within += e <= budget;
    partner_sum += 2.0 - doublet_overlap(blocks, Sector::Plus) - doublet_overlap(blocks, Sector::Minus);
  }
  const double partner_mean = partner_sum / (2.0 * draws);
  MESSAGE("worst-sector epsilon <= budget in " << within << " of " << draws << " draws; median "
                                               << median(worst) << "; per-partner mean " << partner_mean);
  CHECK(median(worst) <= budget);
  CHECK(partner_mean <= budget);
}

TEST_CASE("analysis JSON") {
  const auto a = shifted(0.1, -0.1, 0.0, 1.0, 0.5);
  const nlohmann::json j = a;
  CHECK(j.at("regime") == "separated");
  CHECK(j.at("resonance_energies").size() == 2);
  CHECK(j.at("delta_s").get<double>() == doctest::Approx(0.2));
}
