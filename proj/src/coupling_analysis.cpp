#include "cavtool/coupling_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "cavtool/constants.hpp"
#include "cavtool/errors.hpp"

namespace cavtool {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

Quantity corrected_rate(const Quantity& measured_per_s,
                        const Quantity& efficiency) {
  if (efficiency.value == 0.0) {
    throw std::invalid_argument("efficiency must be nonzero");
  }
  return propagate([](const std::vector<double>& x) { return x[0] / x[1]; },
                   {measured_per_s, efficiency}, "1/s");
}

Quantity peak_spectral_density(const Quantity& rate_per_s,
                               const Quantity& fwhm_ghz) {
  if (!(fwhm_ghz.value > 0.0)) {
    throw std::invalid_argument("linewidth must be positive");
  }
  return propagate(
      [](const std::vector<double>& x) { return 2.0 * x[0] / (kPi * x[1]); },
      {rate_per_s, fwhm_ghz}, "1/(s GHz)");
}

Quantity beta_from_rates(const Quantity& cavity_rate_per_s,
                         const Quantity& free_rate_per_s) {
  if (!(cavity_rate_per_s.value + free_rate_per_s.value > 0.0)) {
    throw std::invalid_argument("total rate must be positive");
  }
  return propagate(
      [](const std::vector<double>& x) { return x[0] / (x[1] + x[0]); },
      {cavity_rate_per_s, free_rate_per_s}, "");
}

Quantity purcell_from_beta(const Quantity& zpl_fwhm_thz,
                           const Quantity& cavity_linewidth_ghz, double xi,
                           const Quantity& beta) {
  if (!(xi > 0.0) || xi > 1.0) {
    throw std::invalid_argument("branching ratio must be in (0, 1]");
  }
  if (!(cavity_linewidth_ghz.value > 0.0)) {
    throw std::invalid_argument("cavity linewidth must be positive");
  }
  return propagate(
      [xi](const std::vector<double>& x) {
        return x[0] * 1e3 / (xi * x[1]) * x[2];  // THz over GHz
      },
      {zpl_fwhm_thz, cavity_linewidth_ghz, beta}, "");
}

EnhancementProjection project_enhancement(const Quantity& purcell, double xi) {
  if (!(xi > 0.0) || xi > 1.0) {
    throw std::invalid_argument("branching ratio must be in (0, 1]");
  }
  EnhancementProjection out;
  out.lifetime_reduction = propagate(
      [xi](const std::vector<double>& x) { return 1.0 + xi * x[0]; },
      {purcell}, "");
  out.zpl_fraction = propagate(
      [xi](const std::vector<double>& x) {
        return xi * (1.0 + x[0]) / (1.0 + xi * x[0]);
      },
      {purcell}, "");
  return out;
}

Quantity quantum_efficiency(const Quantity& observed_rate_per_s,
                            const Quantity& predicted_rate_per_s) {
  if (!(predicted_rate_per_s.value > 0.0)) {
    throw std::invalid_argument("predicted rate must be positive");
  }
  return propagate(
      [](const std::vector<double>& x) { return x[0] / x[1]; },
      {observed_rate_per_s, predicted_rate_per_s}, "");
}

BetaSimulator::BetaSimulator(CavityAssembly assembly, double finesse)
    : assembly_(std::move(assembly)), finesse_(finesse) {
  if (assembly_.ideal) {
    throw std::invalid_argument(
        "funneling simulation needs real mirror stacks");
  }
  if (!(finesse > 0.0)) {
    throw std::invalid_argument("finesse must be positive");
  }
}

double BetaSimulator::beta_from_field(double relative_field,
                                      double mode_volume_um3,
                                      double wavelength_nm,
                                      double index_at_emitter,
                                      double zpl_fwhm_thz, double lifetime_ns,
                                      double kappa_per_s) {
  if (relative_field < 0.0 || relative_field > 1.0 + 1e-12) {
    throw std::invalid_argument("relative field must be in [0, 1]");
  }
  if (!(mode_volume_um3 > 0.0) || !(wavelength_nm > 0.0) ||
      !(index_at_emitter > 0.0) || !(zpl_fwhm_thz >= 0.0) ||
      !(lifetime_ns > 0.0) || !(kappa_per_s > 0.0)) {
    throw std::invalid_argument("funneling parameters out of range");
  }
  const double gamma_free = 1.0 / (lifetime_ns * 1e-9);
  const double gamma_star = 2.0 * kPi * zpl_fwhm_thz * 1e12;
  const double omega = 2.0 * kPi * kSpeedOfLight / (wavelength_nm * 1e-9);
  const double volume_m3 = mode_volume_um3 * 1e-18;
  const double n_cubed =
      index_at_emitter * index_at_emitter * index_at_emitter;
  const double g_sq_peak =
      3.0 * kPi * kSpeedOfLight * kSpeedOfLight * kSpeedOfLight * gamma_free /
      (2.0 * n_cubed * omega * omega * volume_m3);
  const double g_sq = g_sq_peak * kDipoleOrientationFactor * relative_field;
  const double funneling =
      4.0 * g_sq / (kappa_per_s + gamma_star + gamma_free);
  return funneling / (funneling + gamma_free);
}

namespace {

struct PreparedCavity {
  LayerStack stack;
  double air_gap_um = 0.0;
  double mode_volume_um3 = 0.0;
  double peak_eps_intensity = 0.0;
  double kappa_per_s = 0.0;
  double membrane_entry_nm = 0.0;  // z of the flat-mirror/membrane interface
  double membrane_top_nm = 0.0;    // z of the membrane/air interface
};

PreparedCavity prepare_cavity(const CavityAssembly& assembly, double finesse,
                              const CavityGeometry& geometry, ModeIndex mode) {
  if (!(geometry.membrane_thickness_nm > 0.0)) {
    throw std::invalid_argument("funneling simulation needs a membrane");
  }
  PreparedCavity out;
  out.air_gap_um =
      plane_wave_resonant_air_gap_um(assembly, geometry, mode.longitudinal_m);
  out.stack = full_cavity_stack(assembly, geometry, out.air_gap_um);

  double flat_nm = 0.0;
  for (const Layer& layer : assembly.flat_mirror.layers) {
    flat_nm += layer.thickness_nm;
  }
  out.membrane_entry_nm = flat_nm;
  out.membrane_top_nm = flat_nm + geometry.membrane_thickness_nm;

  const AxialEnergy energy =
      axial_energy(out.stack, geometry.wavelength_nm);
  if (!(energy.peak > 0.0)) {
    throw std::invalid_argument("cavity stack carries no field");
  }
  CavityGeometry at_gap = geometry;
  at_gap.air_gap_um = out.air_gap_um;
  const GaussianMode gauss = gaussian_mode(at_gap);
  const double axial_um = energy.integral_nm / energy.peak * 1e-3;
  out.mode_volume_um3 =
      axial_um * kPi * gauss.waist_radius_um * gauss.waist_radius_um / 2.0;
  out.peak_eps_intensity = energy.peak;

  const CavitySpectralParams spectral = spectral_params_from_length(
      finesse, effective_length_um(assembly, at_gap));
  out.kappa_per_s = 2.0 * kPi * spectral.linewidth_ghz * 1e9;
  return out;
}

BetaSimulator::Sample sample_at_depth(const PreparedCavity& prepared,
                                      const CavityGeometry& geometry,
                                      double depth_nm, double zpl_fwhm_thz,
                                      double lifetime_ns) {
  if (depth_nm < 0.0 || depth_nm > geometry.membrane_thickness_nm) {
    throw std::invalid_argument("emitter depth outside the membrane");
  }
  const double z_emitter = prepared.membrane_entry_nm + depth_nm;
  const double eps =
      geometry.membrane_index * geometry.membrane_index;
  const double intensity = std::norm(
      field_at(prepared.stack, geometry.wavelength_nm, z_emitter));
  const double relative =
      std::min(1.0, eps * intensity / prepared.peak_eps_intensity);

  BetaSimulator::Sample sample;
  sample.relative_field = relative;
  sample.mode_volume_um3 = prepared.mode_volume_um3;
  sample.kappa_per_s = prepared.kappa_per_s;
  sample.resonant_air_gap_um = prepared.air_gap_um;
  sample.membrane_top_intensity =
      std::norm(field_at(prepared.stack, geometry.wavelength_nm,
                         prepared.membrane_top_nm)) /
      prepared.peak_eps_intensity;
  sample.beta = BetaSimulator::beta_from_field(
      relative, prepared.mode_volume_um3, geometry.wavelength_nm,
      geometry.membrane_index, zpl_fwhm_thz, lifetime_ns,
      prepared.kappa_per_s);

  const double gamma_free = 1.0 / (lifetime_ns * 1e-9);
  const double gamma_star = 2.0 * kPi * zpl_fwhm_thz * 1e12;
  const double funneling = sample.beta < 1.0
                               ? gamma_free * sample.beta / (1.0 - sample.beta)
                               : 0.0;
  sample.coupling_g_per_s = std::sqrt(
      funneling * (sample.kappa_per_s + gamma_star + gamma_free) / 4.0);
  return sample;
}

}  // namespace

BetaSimulator::Sample BetaSimulator::evaluate(const CavityGeometry& geometry,
                                              ModeIndex mode,
                                              double zpl_fwhm_thz,
                                              double lifetime_ns) const {
  const PreparedCavity prepared =
      prepare_cavity(assembly_, finesse_, geometry, mode);
  return sample_at_depth(prepared, geometry, geometry.emitter_depth_nm,
                         zpl_fwhm_thz, lifetime_ns);
}

BetaScanResult beta_scan(const BetaSimulator& simulator,
                         const CavityGeometry& base,
                         const BetaScanRequest& request) {
  if (request.thickness_samples < 1 || request.depth_samples < 1) {
    throw std::invalid_argument("scan needs at least one sample per axis");
  }
  if (!(request.thickness_lo_nm > 0.0) ||
      request.thickness_hi_nm < request.thickness_lo_nm) {
    throw std::invalid_argument("thickness range is degenerate");
  }
  BetaScanResult result;
  result.thickness_nm.resize(request.thickness_samples);
  for (int i = 0; i < request.thickness_samples; ++i) {
    result.thickness_nm[i] =
        request.thickness_samples == 1
            ? request.thickness_lo_nm
            : request.thickness_lo_nm +
                  (request.thickness_hi_nm - request.thickness_lo_nm) * i /
                      (request.thickness_samples - 1);
  }
  result.depth_nm.resize(request.depth_samples);
  for (int j = 0; j < request.depth_samples; ++j) {
    const double frac =
        request.depth_samples == 1
            ? 0.5
            : static_cast<double>(j) / (request.depth_samples - 1);
    result.depth_nm[j] = request.depth_center_nm +
                         request.depth_sigma_nm * (4.0 * frac - 2.0);
  }
  result.beta.assign(static_cast<std::size_t>(request.thickness_samples) *
                         request.depth_samples,
                     0.0);

  int threads = request.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("CAVTOOL_THREADS")) {
      threads = std::atoi(env);
    }
  }
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  threads = std::clamp(threads, 1, request.thickness_samples);

  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run_rows = [&](int first, int stride) {
    try {
      for (int i = first; i < request.thickness_samples; i += stride) {
        CavityGeometry geometry = base;
        geometry.membrane_thickness_nm = result.thickness_nm[i];
        const PreparedCavity prepared = prepare_cavity(
            simulator.assembly(), simulator.finesse(), geometry, request.mode);
        for (int j = 0; j < request.depth_samples; ++j) {
          const double from_interface = std::clamp(
              geometry.membrane_thickness_nm - result.depth_nm[j], 0.0,
              geometry.membrane_thickness_nm);
          result
              .beta[static_cast<std::size_t>(i) * request.depth_samples + j] =
              sample_at_depth(prepared, geometry, from_interface,
                              request.zpl_fwhm_thz, request.lifetime_ns)
                  .beta;
        }
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (threads == 1) {
    run_rows(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back(run_rows, t, threads);
    }
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace cavtool
