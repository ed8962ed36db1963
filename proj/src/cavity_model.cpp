#include "cavtool/cavity_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cavtool/errors.hpp"

namespace cavtool {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_geometry(const CavityGeometry& g) {
  if (!(g.mirror_radius_um > 0.0)) {
    throw std::invalid_argument("mirror radius must be positive");
  }
  if (!(g.wavelength_nm > 0.0)) {
    throw std::invalid_argument("wavelength must be positive");
  }
  if (g.membrane_thickness_nm < 0.0) {
    throw std::invalid_argument("membrane thickness must be >= 0");
  }
  if (g.membrane_thickness_nm > 0.0 && !(g.membrane_index > 0.0)) {
    throw std::invalid_argument("membrane index must be positive");
  }
}

double gouy_per_pass(double equivalent_length_um, double radius_um) {
  // arccos(sqrt(1 - L/R)) for a plano-concave resonator, written via the
  // Rayleigh range to stay well conditioned near L -> 0.
  const double z_r = std::sqrt(equivalent_length_um *
                               (radius_um - equivalent_length_um));
  return std::atan2(equivalent_length_um, z_r);
}

double wrap_to_pi(double phase) {
  double w = std::remainder(phase, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

}  // namespace

double diffraction_length_um(const CavityGeometry& geometry) {
  validate_geometry(geometry);
  double l = geometry.air_gap_um;
  if (geometry.membrane_thickness_nm > 0.0) {
    l += geometry.membrane_thickness_nm / geometry.membrane_index * 1e-3;
  }
  return l;
}

GaussianMode gaussian_mode(const CavityGeometry& geometry) {
  const double l_eq = diffraction_length_um(geometry);
  const double radius = geometry.mirror_radius_um;
  if (!(l_eq > 0.0) || !(l_eq < radius)) {
    throw StabilityError("unstable geometry: equivalent length " +
                         std::to_string(l_eq) + " um not in (0, " +
                         std::to_string(radius) + ") um");
  }
  const double lambda_um = geometry.wavelength_nm * 1e-3;
  GaussianMode mode;
  mode.waist_position_um = l_eq;
  const double waist_sq = lambda_um / kPi * std::sqrt(l_eq * (radius - l_eq));
  mode.waist_radius_um = std::sqrt(waist_sq);
  mode.rayleigh_range_um = kPi * waist_sq / lambda_um;
  mode.gouy_phase_per_pass_rad = gouy_per_pass(l_eq, radius);
  return mode;
}

CavityAssembly ideal_mirrors() {
  CavityAssembly a;
  a.ideal = true;
  return a;
}

LayerStack bottom_assembly(const CavityAssembly& assembly,
                           const CavityGeometry& geometry) {
  if (assembly.ideal) {
    throw std::invalid_argument("ideal mirrors have no layer description");
  }
  validate_geometry(geometry);
  LayerStack stack = assembly.flat_mirror;
  if (geometry.membrane_thickness_nm > 0.0) {
    stack.layers.insert(stack.layers.begin(),
                        Layer{geometry.membrane_thickness_nm,
                              complexd{geometry.membrane_index, 0.0}});
  }
  return stack;
}

LayerStack full_cavity_stack(const CavityAssembly& assembly,
                             const CavityGeometry& geometry,
                             double air_gap_um) {
  if (assembly.ideal) {
    throw std::invalid_argument("ideal mirrors have no layer description");
  }
  if (!(air_gap_um > 0.0)) {
    throw std::invalid_argument("air gap must be positive");
  }
  validate_geometry(geometry);
  LayerStack stack = reversed(assembly.flat_mirror);
  if (geometry.membrane_thickness_nm > 0.0) {
    stack.layers.push_back(Layer{geometry.membrane_thickness_nm,
                                 complexd{geometry.membrane_index, 0.0}});
  }
  stack.layers.push_back(Layer{air_gap_um * 1e3, complexd{1.0, 0.0}});
  stack.layers.insert(stack.layers.end(), assembly.fiber_mirror.layers.begin(),
                      assembly.fiber_mirror.layers.end());
  stack.exit_index = assembly.fiber_mirror.exit_index;
  return stack;
}

namespace {

double round_trip_phase_impl(const CavityAssembly& assembly,
                             const CavityGeometry& geometry, double air_gap_um,
                             int transverse_q, bool include_gouy) {
  validate_geometry(geometry);
  if (!(air_gap_um > 0.0)) {
    throw std::invalid_argument("air gap must be positive");
  }
  const double lambda = geometry.wavelength_nm;
  double phi_bottom = kPi;
  double phi_fiber = kPi;
  if (!assembly.ideal) {
    phi_bottom =
        stack_response(bottom_assembly(assembly, geometry), lambda)
            .phase_on_reflection;
    phi_fiber =
        stack_response(assembly.fiber_mirror, lambda).phase_on_reflection;
  }
  double gouy_term = 0.0;
  if (include_gouy) {
    CavityGeometry at_gap = geometry;
    at_gap.air_gap_um = air_gap_um;
    const double l_eq = diffraction_length_um(at_gap);
    if (!(l_eq < geometry.mirror_radius_um)) {
      throw StabilityError("air gap outside the stable range");
    }
    gouy_term = 2.0 * (transverse_q + 1) *
                gouy_per_pass(l_eq, geometry.mirror_radius_um);
  }
  return 4.0 * kPi * air_gap_um * 1e3 / lambda + (phi_bottom - kPi) +
         (phi_fiber - kPi) - gouy_term;
}

double solve_air_gap(const CavityAssembly& assembly,
                     const CavityGeometry& geometry, int longitudinal_m,
                     int transverse_q, bool include_gouy) {
  validate_geometry(geometry);
  const double target = kTwoPi * longitudinal_m;
  const double t_over_n =
      geometry.membrane_thickness_nm > 0.0
          ? geometry.membrane_thickness_nm / geometry.membrane_index * 1e-3
          : 0.0;
  double lo = 1e-4;
  double hi = 0.999 * geometry.mirror_radius_um - t_over_n;
  if (!(hi > lo)) {
    throw StabilityError("membrane alone exceeds the stable length");
  }
  auto f = [&](double gap) {
    return round_trip_phase_impl(assembly, geometry, gap, transverse_q,
                                 include_gouy) -
           target;
  };
  double f_lo = f(lo), f_hi = f(hi);
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw RootNotFoundError("order m = " + std::to_string(longitudinal_m) +
                            " has no resonant air gap in the stable range");
  }
  // The phase is strictly increasing in the gap, so plain bisection.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (std::abs(f_mid) < 1e-10) return mid;
    if (f_mid < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double round_trip_phase_rad(const CavityAssembly& assembly,
                            const CavityGeometry& geometry,
                            double air_gap_um, int transverse_q) {
  return round_trip_phase_impl(assembly, geometry, air_gap_um, transverse_q,
                               true);
}

double resonant_air_gap_um(const CavityAssembly& assembly,
                           const CavityGeometry& geometry, ModeIndex mode) {
  return solve_air_gap(assembly, geometry, mode.longitudinal_m,
                       mode.transverse_q, true);
}

double plane_wave_resonant_air_gap_um(const CavityAssembly& assembly,
                                      const CavityGeometry& geometry,
                                      int longitudinal_m) {
  return solve_air_gap(assembly, geometry, longitudinal_m, 0, false);
}

double resonant_wavelength_nm(const CavityAssembly& assembly,
                              const CavityGeometry& geometry, ModeIndex mode,
                              double lo_nm, double hi_nm) {
  validate_geometry(geometry);
  if (!(lo_nm > 0.0) || !(hi_nm > lo_nm)) {
    throw std::invalid_argument("wavelength bracket must satisfy 0 < lo < hi");
  }
  const double target = kTwoPi * mode.longitudinal_m;
  auto f = [&](double lambda) {
    CavityGeometry g = geometry;
    g.wavelength_nm = lambda;
    return round_trip_phase_rad(assembly, g, geometry.air_gap_um,
                                mode.transverse_q) -
           target;
  };
  constexpr int kScan = 2000;
  double prev_lambda = lo_nm;
  double prev_f = f(prev_lambda);
  for (int i = 1; i <= kScan; ++i) {
    const double lambda = lo_nm + (hi_nm - lo_nm) * i / kScan;
    const double cur_f = f(lambda);
    if (prev_f == 0.0) return prev_lambda;
    if (prev_f * cur_f < 0.0) {
      double a = prev_lambda, b = lambda, fa = prev_f;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if (std::abs(fm) < 1e-10) return mid;
        if (fa * fm < 0.0) {
          b = mid;
        } else {
          a = mid;
          fa = fm;
        }
      }
      return 0.5 * (a + b);
    }
    prev_lambda = lambda;
    prev_f = cur_f;
  }
  throw RootNotFoundError("order m = " + std::to_string(mode.longitudinal_m) +
                          " not resonant between " + std::to_string(lo_nm) +
                          " and " + std::to_string(hi_nm) + " nm");
}

double effective_length_um(const CavityAssembly& assembly,
                           const CavityGeometry& geometry) {
  validate_geometry(geometry);
  if (assembly.ideal) return geometry.air_gap_um;
  const double pen_bottom = penetration_depth_nm(
      bottom_assembly(assembly, geometry), geometry.wavelength_nm);
  const double pen_fiber =
      penetration_depth_nm(assembly.fiber_mirror, geometry.wavelength_nm);
  return geometry.air_gap_um + (pen_bottom + pen_fiber) * 1e-3;
}

CavitySpectralParams spectral_params_from_length(double finesse,
                                                 double effective_length_um) {
  if (!(finesse > 0.0) || !(effective_length_um > 0.0)) {
    throw std::invalid_argument("finesse and effective length must be positive");
  }
  CavitySpectralParams p;
  p.finesse = finesse;
  p.effective_length_um = effective_length_um;
  p.fsr_thz = kSpeedOfLight / (2.0 * effective_length_um * 1e-6) * 1e-12;
  p.linewidth_ghz = p.fsr_thz * 1e3 / finesse;
  return p;
}

CavitySpectralParams spectral_params_from_linewidth(double finesse,
                                                    double linewidth_ghz) {
  if (!(finesse > 0.0) || !(linewidth_ghz > 0.0)) {
    throw std::invalid_argument("finesse and linewidth must be positive");
  }
  CavitySpectralParams p;
  p.finesse = finesse;
  p.linewidth_ghz = linewidth_ghz;
  p.fsr_thz = finesse * linewidth_ghz * 1e-3;
  p.effective_length_um = kSpeedOfLight / (2.0 * p.fsr_thz * 1e12) * 1e6;
  return p;
}

double mode_volume_um3(const CavityGeometry& geometry,
                       const FieldProfile& axial_profile) {
  const GaussianMode mode = gaussian_mode(geometry);
  const auto& z = axial_profile.position_nm;
  const auto& intensity = axial_profile.intensity;
  const auto& eps = axial_profile.permittivity;
  if (z.size() < 2 || z.size() != intensity.size() ||
      z.size() != eps.size()) {
    throw std::invalid_argument("axial profile is empty or inconsistent");
  }
  double integral_nm = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    peak = std::max(peak, eps[i] * intensity[i]);
    if (i + 1 < z.size()) {
      integral_nm += 0.5 *
                     (eps[i] * intensity[i] + eps[i + 1] * intensity[i + 1]) *
                     (z[i + 1] - z[i]);
    }
  }
  if (!(peak > 0.0)) {
    throw std::invalid_argument("axial profile has no field energy");
  }
  const double axial_um = integral_nm / peak * 1e-3;
  return axial_um * kPi * mode.waist_radius_um * mode.waist_radius_um / 2.0;
}

DispersionMap dispersion_scan(const CavityAssembly& assembly,
                              const CavityGeometry& geometry,
                              const DispersionRequest& request) {
  validate_geometry(geometry);
  if (request.air_gap_samples < 2 || request.wavelength_samples < 2) {
    throw std::invalid_argument("dispersion scan needs >= 2 samples per axis");
  }
  if (!(request.air_gap_lo_um > 0.0) ||
      !(request.air_gap_hi_um > request.air_gap_lo_um) ||
      !(request.wavelength_lo_nm > 0.0) ||
      !(request.wavelength_hi_nm > request.wavelength_lo_nm)) {
    throw std::invalid_argument("dispersion scan ranges are degenerate");
  }
  if (!(request.phase_halfwidth_rad > 0.0)) {
    throw std::invalid_argument("phase halfwidth must be positive");
  }
  DispersionMap map;
  map.air_gap_um.resize(request.air_gap_samples);
  map.wavelength_nm.resize(request.wavelength_samples);
  for (int i = 0; i < request.air_gap_samples; ++i) {
    map.air_gap_um[i] = request.air_gap_lo_um +
                        (request.air_gap_hi_um - request.air_gap_lo_um) * i /
                            (request.air_gap_samples - 1);
  }
  for (int j = 0; j < request.wavelength_samples; ++j) {
    map.wavelength_nm[j] = request.wavelength_lo_nm +
                           (request.wavelength_hi_nm -
                            request.wavelength_lo_nm) *
                               j / (request.wavelength_samples - 1);
  }
  const std::vector<int> transverse =
      request.transverse.empty() ? std::vector<int>{0} : request.transverse;

  map.value.assign(
      static_cast<std::size_t>(request.air_gap_samples) *
          request.wavelength_samples,
      0.0);
  for (int j = 0; j < request.wavelength_samples; ++j) {
    CavityGeometry g = geometry;
    g.wavelength_nm = map.wavelength_nm[j];
    for (int i = 0; i < request.air_gap_samples; ++i) {
      double v = 0.0;
      for (int q : transverse) {
        const double phase =
            round_trip_phase_rad(assembly, g, map.air_gap_um[i], q);
        const double detune = wrap_to_pi(phase) / request.phase_halfwidth_rad;
        v += 1.0 / (1.0 + q) / (1.0 + detune * detune);
      }
      map.value[static_cast<std::size_t>(i) * request.wavelength_samples + j] =
          v;
    }
  }

  for (int m : request.longitudinal) {
    for (int q : transverse) {
      DispersionBranch branch;
      branch.longitudinal_m = m;
      branch.transverse_q = q;
      for (double lambda : map.wavelength_nm) {
        CavityGeometry g = geometry;
        g.wavelength_nm = lambda;
        branch.wavelength_nm.push_back(lambda);
        branch.air_gap_um.push_back(
            resonant_air_gap_um(assembly, g, ModeIndex{m, q}));
      }
      map.branches.push_back(std::move(branch));
    }
  }
  return map;
}

}  // namespace cavtool
