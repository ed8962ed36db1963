#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "cavtool/cavity_model.hpp"
#include "cavtool/constants.hpp"
#include "cavtool/coupling_analysis.hpp"
#include "cavtool/layered_optics.hpp"
#include "cavtool/quantity.hpp"

using namespace cavtool;

namespace {

constexpr double kPi = std::numbers::pi;

CavityAssembly membrane_assembly() {
  CavityAssembly a;
  a.flat_mirror = design_bragg_mirror(70e-6, 603.0, kIndexTantala, kIndexSilica,
                                      MirrorTermination::kLowIndex,
                                      kIndexSilica)
                      .stack;
  a.fiber_mirror = design_bragg_mirror(70e-6, 603.0, kIndexTantala,
                                       kIndexSilica,
                                       MirrorTermination::kHighIndex,
                                       kIndexSilica)
                       .stack;
  return a;
}

CavityGeometry membrane_geometry(double thickness_nm, double depth_nm) {
  CavityGeometry g;
  g.mirror_radius_um = 43.1;
  g.air_gap_um = 4.5;  // replaced by the resonance solve
  g.membrane_thickness_nm = thickness_nm;
  g.membrane_index = kIndexDiamond;
  g.emitter_depth_nm = depth_nm;
  g.wavelength_nm = 603.0;
  return g;
}

}  // namespace

TEST_CASE("efficiency correction recovers the emitted rate") {
  const Quantity free_space =
      corrected_rate(symmetric(4000.0, 200.0, "counts/s"),
                     Quantity{3.5e-3, 0.9e-3, 1.5e-3, ""});
  CHECK(free_space.value == doctest::Approx(4000.0 / 3.5e-3).epsilon(1e-12));
  CHECK(free_space.value == doctest::Approx(1.14e6).epsilon(3e-3));

  // The efficiency enters inversely, so its lower excursion feeds the upper
  // output side.
  const double up = std::hypot(200.0 / 3.5e-3,
                               4000.0 / 3.5e-3 * (1.5e-3 / 3.5e-3));
  const double down = std::hypot(200.0 / 3.5e-3,
                                 4000.0 / 3.5e-3 * (0.9e-3 / 3.5e-3));
  CHECK(free_space.sigma_plus == doctest::Approx(up).epsilon(1e-5));
  CHECK(free_space.sigma_minus == doctest::Approx(down).epsilon(1e-5));

  const Quantity cavity = corrected_rate(symmetric(380.0, 20.0, "counts/s"),
                                         symmetric(8.2e-2, 1.2e-2, ""));
  CHECK(cavity.value == doctest::Approx(380.0 / 8.2e-2).epsilon(1e-12));
  CHECK(cavity.value == doctest::Approx(4634.15).epsilon(1e-4));

  const Quantity identity =
      corrected_rate(symmetric(4000.0, 200.0, "counts/s"), symmetric(1.0, 0.0));
  CHECK(identity.value == doctest::Approx(4000.0).epsilon(1e-12));
  CHECK(identity.sigma_plus == doctest::Approx(200.0).epsilon(1e-6));

  CHECK_THROWS_AS(corrected_rate(symmetric(4000.0, 200.0),
                                 symmetric(0.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("peak spectral densities reproduce the quoted comparison") {
  // Free-space emitter: the fraction inside the thermally broadened line.
  const Quantity free_density = peak_spectral_density(
      symmetric(0.6 * 1.2e6, 0.0, "1/s"), symmetric(5220.0, 0.0, "GHz"));
  CHECK(free_density.value ==
        doctest::Approx(2.0 * 0.72e6 / (kPi * 5220.0)).epsilon(1e-12));
  CHECK(free_density.value == doctest::Approx(87.81).epsilon(2e-4));
  CHECK(free_density.value == doctest::Approx(90.0).epsilon(0.05));

  const Quantity cavity_density = peak_spectral_density(
      symmetric(4700.0, 0.0, "1/s"), symmetric(1.08, 0.0, "GHz"));
  CHECK(cavity_density.value ==
        doctest::Approx(2.0 * 4700.0 / (kPi * 1.08)).epsilon(1e-12));
  CHECK(cavity_density.value == doctest::Approx(2770.5).epsilon(1e-4));
  CHECK(cavity_density.value == doctest::Approx(2800.0).epsilon(0.02));

  const double ratio = cavity_density.value / free_density.value;
  CHECK(ratio == doctest::Approx(31.55).epsilon(1e-3));
  CHECK(ratio == doctest::Approx(31.0).epsilon(0.02));

  CHECK_THROWS_AS(peak_spectral_density(symmetric(4700.0, 0.0),
                                        symmetric(0.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("peak spectral density is linear in rate and inverse in width") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> rate(10.0, 1e7);
  std::uniform_real_distribution<double> width(0.1, 1e4);
  std::uniform_real_distribution<double> factor(0.1, 10.0);
  for (int i = 0; i < 50; ++i) {
    const double r = rate(rng), w = width(rng), c = factor(rng);
    const double base =
        peak_spectral_density(symmetric(r, 0.0), symmetric(w, 0.0)).value;
    CHECK(peak_spectral_density(symmetric(c * r, 0.0), symmetric(w, 0.0))
              .value == doctest::Approx(c * base).epsilon(1e-12));
    CHECK(peak_spectral_density(symmetric(r, 0.0), symmetric(c * w, 0.0))
              .value == doctest::Approx(base / c).epsilon(1e-12));
  }
}

TEST_CASE("funneling fraction from the two corrected rates") {
  const Quantity beta =
      beta_from_rates(symmetric(4700.0, 900.0, "1/s"),
                      symmetric(1.2e6, 0.4e6, "1/s"));
  CHECK(beta.value == doctest::Approx(4700.0 / 1204700.0).epsilon(1e-12));
  CHECK(beta.value == doctest::Approx(0.0039014).epsilon(1e-4));

  CHECK(beta_from_rates(symmetric(4700.0, 0.0), symmetric(0.0, 0.0)).value ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(beta_from_rates(symmetric(0.0, 0.0), symmetric(1.2e6, 0.0)).value ==
        0.0);
  CHECK_THROWS_AS(beta_from_rates(symmetric(0.0, 0.0), symmetric(0.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("purcell factor from the measured funneling fraction") {
  const Quantity purcell =
      purcell_from_beta(symmetric(5.22, 0.0, "THz"),
                        symmetric(1.08, 0.0, "GHz"), 0.6,
                        symmetric(0.004, 0.0));
  CHECK(purcell.value ==
        doctest::Approx(5220.0 / (0.6 * 1.08) * 0.004).epsilon(1e-12));
  CHECK(purcell.value == doctest::Approx(32.22).epsilon(1e-3));

  CHECK(purcell_from_beta(symmetric(5.22, 0.0), symmetric(1.08, 0.0), 0.6,
                          symmetric(0.0, 0.0))
            .value == 0.0);

  const double doubled =
      purcell_from_beta(symmetric(5.22, 0.0), symmetric(2.16, 0.0), 0.6,
                        symmetric(0.004, 0.0))
          .value;
  CHECK(doubled == doctest::Approx(purcell.value / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(purcell_from_beta(symmetric(5.22, 0.0),
                                    symmetric(1.08, 0.0), 0.0,
                                    symmetric(0.004, 0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(purcell_from_beta(symmetric(5.22, 0.0),
                                    symmetric(0.0, 0.0), 0.6,
                                    symmetric(0.004, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("composed and direct purcell paths agree") {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> cav(100.0, 1e4);
  std::uniform_real_distribution<double> free_rate(1e5, 1e7);
  std::uniform_real_distribution<double> xi_draw(0.2, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double i_cav = cav(rng), i_free = free_rate(rng);
    const double xi = xi_draw(rng);
    const Quantity beta =
        beta_from_rates(symmetric(i_cav, 0.0), symmetric(i_free, 0.0));
    const double composed =
        purcell_from_beta(symmetric(5.22, 0.0), symmetric(1.08, 0.0), xi, beta)
            .value;
    const double direct =
        5220.0 / (xi * 1.08) * i_cav / (i_cav + i_free);
    CHECK(composed == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("projected enhancement for a narrow emitter") {
  const EnhancementProjection at_quote =
      project_enhancement(symmetric(32.0, 0.0), 0.6);
  CHECK(at_quote.lifetime_reduction.value ==
        doctest::Approx(1.0 + 0.6 * 32.0).epsilon(1e-12));
  CHECK(at_quote.zpl_fraction.value ==
        doctest::Approx(0.6 * 33.0 / 20.2).epsilon(1e-12));
  CHECK(at_quote.zpl_fraction.value > 0.95);

  const EnhancementProjection off = project_enhancement(symmetric(0.0, 0.0),
                                                        0.6);
  CHECK(off.lifetime_reduction.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(off.zpl_fraction.value == doctest::Approx(0.6).epsilon(1e-12));

  for (double fp : {0.0, 1.0, 32.0, 500.0}) {
    CHECK(project_enhancement(symmetric(fp, 0.0), 1.0).zpl_fraction.value ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(project_enhancement(symmetric(32.0, 0.0), 1.5),
                  std::invalid_argument);
}

TEST_CASE("quantum efficiency is the rate ratio") {
  const Quantity qe = quantum_efficiency(symmetric(1.2e6, 0.0, "1/s"),
                                         symmetric(6.8e6, 0.0, "1/s"));
  CHECK(qe.value == doctest::Approx(1.2 / 6.8).epsilon(1e-12));
  CHECK(qe.value == doctest::Approx(0.176).epsilon(5e-3));

  CHECK(quantum_efficiency(symmetric(6.8e6, 0.0), symmetric(6.8e6, 0.0))
            .value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quantum_efficiency(symmetric(0.0, 0.0), symmetric(6.8e6, 0.0)).value ==
        0.0);
  CHECK_THROWS_AS(quantum_efficiency(symmetric(1.2e6, 0.0),
                                     symmetric(0.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("field-to-funneling map is bounded and monotone") {
  const double kappa = 2.0 * kPi * 1.08e9;
  CHECK(BetaSimulator::beta_from_field(0.0, 25.0, 603.0, kIndexDiamond, 5.22,
                                       6.0, kappa) == 0.0);
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> volume(1.0, 200.0);
  std::uniform_real_distribution<double> rel(0.0, 1.0);
  double prev = -1.0;
  for (double field : {0.0, 0.1, 0.3, 0.6, 1.0}) {
    const double beta = BetaSimulator::beta_from_field(
        field, 25.0, 603.0, kIndexDiamond, 5.22, 6.0, kappa);
    CHECK(beta >= 0.0);
    CHECK(beta <= 1.0);
    CHECK(beta > prev);
    prev = beta;
  }
  for (int i = 0; i < 50; ++i) {
    const double beta = BetaSimulator::beta_from_field(
        rel(rng), volume(rng), 603.0, kIndexDiamond, 5.22, 6.0, kappa);
    CHECK(beta >= 0.0);
    CHECK(beta <= 1.0);
  }
  CHECK_THROWS_AS(BetaSimulator::beta_from_field(1.5, 25.0, 603.0,
                                                 kIndexDiamond, 5.22, 6.0,
                                                 kappa),
                  std::invalid_argument);
  CHECK_THROWS_AS(BetaSimulator::beta_from_field(0.5, 0.0, 603.0,
                                                 kIndexDiamond, 5.22, 6.0,
                                                 kappa),
                  std::invalid_argument);
}

TEST_CASE("simulator rejects degenerate configurations") {
  CHECK_THROWS_AS(BetaSimulator(ideal_mirrors(), 11200.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(BetaSimulator(membrane_assembly(), 0.0),
                  std::invalid_argument);

  const BetaSimulator simulator(membrane_assembly(), 11200.0);
  CHECK_THROWS_AS(simulator.evaluate(membrane_geometry(862.0, 900.0),
                                     ModeIndex{15, 0}, 5.22, 6.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulator.evaluate(membrane_geometry(862.0, -1.0),
                                     ModeIndex{15, 0}, 5.22, 6.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulator.evaluate(membrane_geometry(0.0, 0.0),
                                     ModeIndex{15, 0}, 5.22, 6.0),
                  std::invalid_argument);
}

TEST_CASE("emitter on a node decouples, on an antinode it funnels") {
  const BetaSimulator simulator(membrane_assembly(), 11200.0);
  // The flat mirror terminates low-index, so the standing wave inside the
  // membrane has an antinode at the mirror interface and a node a quarter
  // of the in-medium wavelength above it.
  const double quarter = 603.0 / (4.0 * kIndexDiamond);  // 62.55 nm
  const BetaSimulator::Sample at_node = simulator.evaluate(
      membrane_geometry(862.0, quarter), ModeIndex{15, 0}, 5.22, 6.0);
  const BetaSimulator::Sample at_antinode = simulator.evaluate(
      membrane_geometry(862.0, 2.0 * quarter), ModeIndex{15, 0}, 5.22, 6.0);
  CHECK(at_antinode.beta > 0.004);
  CHECK(at_node.beta < 0.02 * at_antinode.beta);
  CHECK(at_node.relative_field < 0.02);
  CHECK(at_antinode.relative_field > 0.8);
}

TEST_CASE("a sample is internally consistent") {
  const BetaSimulator simulator(membrane_assembly(), 11200.0);
  const BetaSimulator::Sample s = simulator.evaluate(
      membrane_geometry(862.0, 125.0), ModeIndex{15, 0}, 5.22, 6.0);
  CHECK(s.beta > 0.0);
  CHECK(s.beta < 1.0);
  CHECK(s.relative_field > 0.0);
  CHECK(s.relative_field <= 1.0);
  CHECK(s.mode_volume_um3 > 1.0);
  CHECK(s.mode_volume_um3 < 500.0);
  CHECK(s.resonant_air_gap_um > 0.0);
  CHECK(s.membrane_top_intensity >= 0.0);
  CHECK(s.membrane_top_intensity <= 1.0);

  // The reported coupling closes the funneling identity.
  const double gamma_free = 1.0 / 6.0e-9;
  const double gamma_star = 2.0 * kPi * 5.22e12;
  const double r_cav = 4.0 * s.coupling_g_per_s * s.coupling_g_per_s /
                       (s.kappa_per_s + gamma_star + gamma_free);
  CHECK(r_cav / (r_cav + gamma_free) ==
        doctest::Approx(s.beta).epsilon(1e-9));

  // kappa follows from the finesse through the effective length.
  CavityGeometry at_gap = membrane_geometry(862.0, 125.0);
  at_gap.air_gap_um = s.resonant_air_gap_um;
  const double l_eff = effective_length_um(simulator.assembly(), at_gap);
  const double kappa = 2.0 * kPi *
                       spectral_params_from_length(11200.0, l_eff)
                           .linewidth_ghz * 1e9;
  CHECK(s.kappa_per_s == doctest::Approx(kappa).epsilon(1e-12));
}

TEST_CASE("depth scan sweeps below the implanted face") {
  const BetaSimulator simulator(membrane_assembly(), 11200.0);
  BetaScanRequest request;
  request.thickness_lo_nm = 862.0;
  request.thickness_hi_nm = 862.0;
  request.thickness_samples = 1;
  request.depth_center_nm = 125.0;
  request.depth_sigma_nm = 20.0;
  request.depth_samples = 5;
  request.mode = ModeIndex{15, 0};
  request.zpl_fwhm_thz = 5.22;
  request.lifetime_ns = 6.0;
  request.threads = 1;
  const BetaScanResult scan =
      beta_scan(simulator, membrane_geometry(862.0, 0.0), request);
  REQUIRE(scan.thickness_nm.size() == 1);
  REQUIRE(scan.depth_nm.size() == 5);
  REQUIRE(scan.beta.size() == 5);
  for (int j = 0; j < 5; ++j) {
    CHECK(scan.depth_nm[j] ==
          doctest::Approx(85.0 + 20.0 * j).epsilon(1e-12));
    // The scan depth counts from the membrane-top face the ions entered, so
    // the matching single evaluation sits at thickness - depth from the
    // mirror interface.
    const BetaSimulator::Sample direct = simulator.evaluate(
        membrane_geometry(862.0, 862.0 - scan.depth_nm[j]), ModeIndex{15, 0},
        5.22, 6.0);
    CHECK(scan.beta[j] == direct.beta);
  }
}

TEST_CASE("implantation window at the benchmark thickness spans the band") {
  const BetaSimulator simulator(membrane_assembly(), 11200.0);
  BetaScanRequest request;
  request.thickness_lo_nm = 862.0;
  request.thickness_hi_nm = 862.0;
  request.thickness_samples = 1;
  request.depth_center_nm = 125.0;
  request.depth_sigma_nm = 20.0;
  request.depth_samples = 41;
  request.mode = ModeIndex{15, 0};
  request.zpl_fwhm_thz = 5.22;
  request.lifetime_ns = 6.0;
  request.threads = 1;
  const BetaScanResult scan =
      beta_scan(simulator, membrane_geometry(862.0, 0.0), request);
  const double lo = *std::min_element(scan.beta.begin(), scan.beta.end());
  const double hi = *std::max_element(scan.beta.begin(), scan.beta.end());
  CHECK(lo == doctest::Approx(5.77e-4).epsilon(5e-3));
  CHECK(hi == doctest::Approx(1.1535e-2).epsilon(5e-3));
  // The window brackets the measured fraction.
  CHECK(lo < 0.004);
  CHECK(hi > 0.004);
}

TEST_CASE("scan output does not depend on the thread count") {
  const BetaSimulator simulator(membrane_assembly(), 11200.0);
  BetaScanRequest request;
  request.thickness_lo_nm = 850.0;
  request.thickness_hi_nm = 874.0;
  request.thickness_samples = 5;
  request.depth_center_nm = 125.0;
  request.depth_sigma_nm = 20.0;
  request.depth_samples = 3;
  request.mode = ModeIndex{15, 0};
  request.zpl_fwhm_thz = 5.22;
  request.lifetime_ns = 6.0;
  const CavityGeometry base = membrane_geometry(862.0, 0.0);

  request.threads = 1;
  const BetaScanResult serial = beta_scan(simulator, base, request);
  request.threads = 3;
  const BetaScanResult parallel = beta_scan(simulator, base, request);
  REQUIRE(serial.beta.size() == parallel.beta.size());
  for (std::size_t i = 0; i < serial.beta.size(); ++i) {
    CHECK(serial.beta[i] == parallel.beta[i]);
  }

  CHECK_THROWS_AS(beta_scan(simulator, base, BetaScanRequest{}),
                  std::invalid_argument);
}

TEST_CASE("funneling peaks where the membrane top is antinodal") {
  const BetaSimulator simulator(membrane_assembly(), 11200.0);
  // One in-membrane half-wave of thickness, emitter pinned to the first
  // antinode above the mirror so only the thickness varies the coupling.
  const double antinode = 603.0 / (2.0 * kIndexDiamond);
  std::vector<double> thickness, beta, top;
  for (double t = 740.0; t <= 990.0; t += 5.0) {
    const BetaSimulator::Sample s = simulator.evaluate(
        membrane_geometry(t, antinode), ModeIndex{15, 0}, 5.22, 6.0);
    thickness.push_back(t);
    beta.push_back(s.beta);
    top.push_back(s.membrane_top_intensity);
  }
  const auto peak_beta =
      std::max_element(beta.begin(), beta.end()) - beta.begin();
  const auto peak_top = std::max_element(top.begin(), top.end()) - top.begin();
  CHECK(std::abs(static_cast<long>(peak_beta) -
                 static_cast<long>(peak_top)) <= 2);
  // The modulation with thickness is real, not numerical noise.
  const double contrast = *std::max_element(beta.begin(), beta.end()) /
                          *std::min_element(beta.begin(), beta.end());
  CHECK(contrast > 1.2);
}
