#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cavtool/emitter_dynamics.hpp"
#include "cavtool/errors.hpp"
#include "support/oracles.hpp"

using namespace cavtool;

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

// Fast optical cycle with slow shelving, the regime the two-exponential
// correlation describes. A strongly cyclic set (pump, shelving and
// deshelving all comparable, weak decay) has complex relaxation
// eigenvalues and is rejected by the library, so the guard resamples the
// rare draw whose eigenvalues come too close.
ThreeLevelRates random_rates(std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    ThreeLevelRates r;
    r.k12 = log_uniform(rng, 0.05, 5.0);
    r.k21 = log_uniform(rng, 0.5, 5.0);
    r.k23 = log_uniform(rng, 0.01, 0.3);
    r.k31 = log_uniform(rng, 0.01, 0.3);
    const double s = r.k12 + r.k21 + r.k23 + r.k31;
    const double p = r.k12 * r.k23 + r.k12 * r.k31 + (r.k21 + r.k23) * r.k31;
    if (s * s - 4.0 * p > 0.05 * s * s) return r;
  }
  throw std::runtime_error("rate sampling failed to separate eigenvalues");
}

G2Params random_g2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> bunching(0.0, 3.0);
  std::uniform_real_distribution<double> fast(0.1, 10.0);
  std::uniform_real_distribution<double> ratio(5.0, 200.0);
  G2Params p;
  p.bunching_a = bunching(rng);
  p.tau1_ns = fast(rng);
  p.tau2_ns = p.tau1_ns * ratio(rng);
  return p;
}

}  // namespace

TEST_CASE("antibunching dip reaches zero at zero delay") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    CHECK(std::abs(g2_intrinsic(random_g2(rng), 0.0)) < 1e-12);
  }
}

TEST_CASE("correlation returns to one at long delays") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 200; ++i) {
    const G2Params p = random_g2(rng);
    const double tau = 10.0 * std::max(p.tau1_ns, p.tau2_ns);
    const double bound = (1.0 + 2.0 * p.bunching_a) * std::exp(-10.0) + 1e-12;
    CHECK(std::abs(g2_intrinsic(p, tau) - 1.0) < bound);
  }
}

TEST_CASE("bunching shoulder matches direct arithmetic") {
  const G2Params p{0.5, 1.0, 100.0};
  const double expect = 1.0 - 1.5 * std::exp(-10.0) + 0.5 * std::exp(-0.1);
  CHECK(g2_intrinsic(p, 10.0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(g2_intrinsic(p, 10.0) == doctest::Approx(1.4524).epsilon(1e-4));
}

TEST_CASE("correlation is even in the delay") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> delay(0.0, 50.0);
  for (int i = 0; i < 100; ++i) {
    const G2Params p = random_g2(rng);
    const double tau = delay(rng);
    CHECK(g2_intrinsic(p, -tau) == g2_intrinsic(p, tau));
  }
}

TEST_CASE("unit signal fraction reproduces the intrinsic correlation") {
  const G2Params p{0.8, 2.0, 40.0};
  for (double tau : {0.0, 0.5, 3.0, 80.0}) {
    CHECK(g2_measured(p, 1.0, tau) == g2_intrinsic(p, tau));
  }
}

TEST_CASE("vanishing signal fraction flattens the correlation to one") {
  const G2Params p{0.8, 2.0, 40.0};
  for (double tau : {0.0, 0.5, 3.0}) {
    CHECK(std::abs(g2_measured(p, 1e-6, tau) - 1.0) < 1e-11);
  }
  CHECK_THROWS_AS(g2_measured(p, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(g2_measured(p, 1.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(g2_measured(p, -0.1, 1.0), std::invalid_argument);
}

TEST_CASE("zero-delay floor measures the signal fraction") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> fraction(0.05, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double sigma = fraction(rng);
    const double floor = g2_measured(random_g2(rng), sigma, 0.0);
    CHECK(floor == doctest::Approx(1.0 - sigma * sigma).epsilon(1e-12));
  }
  // Inverting the floor: a measured 0.25 at zero delay means sigma^2 = 0.75.
  const double sigma = std::sqrt(0.75);
  CHECK(sigma == doctest::Approx(0.8660254038).epsilon(1e-9));
  CHECK(g2_measured(random_g2(rng), sigma, 0.0) ==
        doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("two-level rates collapse the bunching term") {
  std::mt19937_64 rng(59);
  for (int i = 0; i < 20; ++i) {
    ThreeLevelRates r = random_rates(rng);
    r.k23 = 0.0;
    r.k31 = 0.0;
    const G2Params p = rates_to_g2_params(r);
    CHECK(p.bunching_a == 0.0);
    CHECK(p.tau2_ns == 0.0);
    CHECK(1.0 / p.tau1_ns == doctest::Approx(r.k12 + r.k21).epsilon(1e-12));
  }
}

TEST_CASE("rate-derived correlation matches direct integration") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 100; ++i) {
    const ThreeLevelRates r = random_rates(rng);
    const G2Params p = rates_to_g2_params(r);
    const oracles::ThreeLevelOde ode{r.k12, r.k21, r.k23, r.k31};
    for (double scale : {0.3, 1.0, 3.0}) {
      const double tau = scale * p.tau1_ns;
      const double expect = ode.g2(tau);
      CHECK(std::abs(g2_intrinsic(p, tau) - expect) <=
            1e-6 * std::max(1.0, std::abs(expect)));
    }
    for (double scale : {1.0, 5.0}) {
      const double tau = scale * p.tau2_ns;
      const double expect = ode.g2(tau);
      CHECK(std::abs(g2_intrinsic(p, tau) - expect) <=
            1e-6 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST_CASE("rescaling all rates rescales only the timescales") {
  std::mt19937_64 rng(67);
  for (int i = 0; i < 50; ++i) {
    const ThreeLevelRates r = random_rates(rng);
    const G2Params base = rates_to_g2_params(r);
    for (double c : {0.5, 3.7}) {
      const ThreeLevelRates scaled{c * r.k12, c * r.k21, c * r.k23, c * r.k31};
      const G2Params p = rates_to_g2_params(scaled);
      CHECK(p.bunching_a == doctest::Approx(base.bunching_a).epsilon(1e-9));
      CHECK(p.tau1_ns == doctest::Approx(base.tau1_ns / c).epsilon(1e-9));
      CHECK(p.tau2_ns == doctest::Approx(base.tau2_ns / c).epsilon(1e-9));
    }
  }
}

TEST_CASE("stronger shelving never weakens the bunching") {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 30; ++i) {
    ThreeLevelRates r;
    r.k12 = log_uniform(rng, 0.1, 2.0);
    r.k21 = log_uniform(rng, 1.0, 5.0);
    r.k31 = log_uniform(rng, 0.02, 0.2);
    double prev = -1.0;
    for (double k23 : {0.02, 0.05, 0.2, 0.5, 1.0}) {
      r.k23 = k23;
      const double a = rates_to_g2_params(r).bunching_a;
      CHECK(a >= prev);
      prev = a;
    }
  }
}

TEST_CASE("degenerate relaxation spectra are reported as such") {
  // Equal eigenvalues: k12 = k31 = x with no decay or shelving.
  CHECK_THROWS_AS(rates_to_g2_params(ThreeLevelRates{1.0, 0.0, 0.0, 1.0}),
                  DegenerateRatesError);
  // Complex pair: strong shelving loop with weak damping.
  CHECK_THROWS_AS(rates_to_g2_params(ThreeLevelRates{1.0, 0.0, 1.0, 1.0}),
                  DegenerateRatesError);
  CHECK_THROWS_AS(rates_to_g2_params(ThreeLevelRates{0.0, 1.0, 0.1, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(rates_to_g2_params(ThreeLevelRates{1.0, -0.1, 0.1, 0.1}),
                  std::invalid_argument);
}

TEST_CASE("steady state is normalized and stations the flow") {
  std::mt19937_64 rng(73);
  for (int i = 0; i < 100; ++i) {
    const ThreeLevelRates r = random_rates(rng);
    const PopulationState s = steady_state(r);
    CHECK(s.ground + s.excited + s.dark ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(-r.k12 * s.ground + r.k21 * s.excited + r.k31 * s.dark) <
          1e-12);
    CHECK(std::abs(r.k23 * s.excited - r.k31 * s.dark) < 1e-12);
    CHECK(s.ground >= 0.0);
    CHECK(s.excited >= 0.0);
    CHECK(s.dark >= 0.0);
  }
}

TEST_CASE("steady state limits come out exactly") {
  const PopulationState unpumped = steady_state(ThreeLevelRates{0.0, 1.0,
                                                                0.1, 0.1});
  CHECK(unpumped.ground == 1.0);
  CHECK(unpumped.excited == 0.0);
  CHECK(unpumped.dark == 0.0);

  // No deshelving: population drains into the dark state.
  const PopulationState trapped = steady_state(ThreeLevelRates{1.0, 1.0,
                                                               0.5, 0.0});
  CHECK(trapped.dark == 1.0);

  // No shelving path: the dark state stays empty.
  const PopulationState bright = steady_state(ThreeLevelRates{1.0, 1.0,
                                                              0.0, 0.0});
  CHECK(bright.dark == 0.0);
  CHECK(bright.excited == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("steady state is the fixed point of the rate equations") {
  std::mt19937_64 rng(79);
  const double third = 1.0 / 3.0;
  const std::array<double, 3> starts[] = {
      {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0},
      {third, third, third}};
  for (int i = 0; i < 10; ++i) {
    const ThreeLevelRates r = random_rates(rng);
    const PopulationState s = steady_state(r);
    const oracles::ThreeLevelOde ode{r.k12, r.k21, r.k23, r.k31};
    const double min_rate =
        std::min(std::min(r.k12, r.k21), std::min(r.k23, r.k31));
    const double t_settle = 20.0 / min_rate;
    // Step bound from the rate sum keeps RK4 stable without assuming
    // anything about the eigenvalue structure.
    const double h = 0.01 / (r.k12 + r.k21 + r.k23 + r.k31);
    for (const auto& start : starts) {
      const auto p = ode.integrate(start, t_settle, h);
      CHECK(std::abs(p[0] - s.ground) < 1e-6);
      CHECK(std::abs(p[1] - s.excited) < 1e-6);
      CHECK(std::abs(p[2] - s.dark) < 1e-6);
    }
  }
}

TEST_CASE("shelving branching sets the dark-state ceiling") {
  // Fitted shelving-to-deshelving ratio of 24 gives the quoted 96 percent.
  const ThreeLevelRates r{1.0, 1.0, 0.24, 0.01};
  CHECK(dark_population_limit(r) == doctest::Approx(0.96).epsilon(1e-12));
  CHECK(dark_population_limit(ThreeLevelRates{1.0, 1.0, 0.0, 0.1}) == 0.0);
  CHECK(dark_population_limit(ThreeLevelRates{1.0, 1.0, 0.1, 0.0}) == 1.0);

  // The steady-state dark population climbs toward the ceiling with pump.
  double prev = 0.0;
  for (double pump : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    const double dark =
        steady_state(ThreeLevelRates{pump, 1.0, 0.24, 0.01}).dark;
    CHECK(dark > prev);
    CHECK(dark < dark_population_limit(r));
    prev = dark;
  }
  CHECK(prev == doctest::Approx(0.96).epsilon(1e-2));
}

TEST_CASE("detected flux is population times decay times efficiency") {
  const PopulationState s{0.5, 0.3, 0.2};
  CHECK(emission_rate_per_s(s, 2.2, 0.5) ==
        doctest::Approx(0.3 * 2.2e9 * 0.5).epsilon(1e-12));
  CHECK(emission_rate_per_s(s, 2.2, 0.25) ==
        doctest::Approx(0.5 * emission_rate_per_s(s, 2.2, 0.5)).epsilon(1e-12));

  // Unpumped emitter emits nothing.
  const PopulationState unpumped = steady_state(ThreeLevelRates{0.0, 1.0 / 6.0,
                                                                0.1, 0.1});
  CHECK(emission_rate_per_s(unpumped, 1.0 / 6.0, 1.0) == 0.0);

  // A 6.0 ns lifetime and the observed bright-state flux pin the excited
  // population: the chain reproduces the flux it was solved from.
  const double k21 = 1.0 / 6.0;
  const double p_excited = 6.8e6 / (k21 * 1e9);
  CHECK(p_excited < 1.0);
  CHECK(emission_rate_per_s(PopulationState{1.0 - p_excited, p_excited, 0.0},
                            k21, 1.0) ==
        doctest::Approx(6.8e6).epsilon(1e-12));

  CHECK_THROWS_AS(emission_rate_per_s(s, -1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(emission_rate_per_s(s, 2.2, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(emission_rate_per_s(s, 2.2, -0.5), std::invalid_argument);
}

TEST_CASE("saturation curve passes its anchor points") {
  const SaturationParams p{4000.0, 3.9, 0.0};
  CHECK(saturation_rate_per_s(p, 0.0) == 0.0);
  CHECK(saturation_rate_per_s(p, 3.9) == doctest::Approx(2000.0).epsilon(1e-12));
  CHECK(saturation_rate_per_s(p, 19.0) ==
        doctest::Approx(4000.0 * 19.0 / 22.9).epsilon(1e-12));
  CHECK(saturation_rate_per_s(p, 19.0) == doctest::Approx(3319.0).epsilon(1e-4));

  // Linear background adds on top.
  const SaturationParams with_bg{4000.0, 3.9, 25.0};
  CHECK(saturation_rate_per_s(with_bg, 19.0) ==
        doctest::Approx(4000.0 * 19.0 / 22.9 + 25.0 * 19.0).epsilon(1e-12));

  CHECK_THROWS_AS(saturation_rate_per_s(SaturationParams{4000.0, 0.0, 0.0},
                                        1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(saturation_rate_per_s(p, -1.0), std::invalid_argument);
}

TEST_CASE("power laws drive pump and shelving only") {
  const PowerLaws laws{0.05, 0.01, 0.002, 1.0 / 6.0, 0.01};
  const ThreeLevelRates low = rates_at_power(laws, 1.0);
  const ThreeLevelRates high = rates_at_power(laws, 10.0);
  CHECK(low.k12 == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(high.k12 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(low.k23 == doctest::Approx(0.012).epsilon(1e-12));
  CHECK(high.k23 == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(low.k21 == high.k21);
  CHECK(low.k31 == high.k31);
  CHECK(rates_at_power(laws, 0.0).k12 == 0.0);
  CHECK_THROWS_AS(rates_at_power(laws, -1.0), std::invalid_argument);
}
