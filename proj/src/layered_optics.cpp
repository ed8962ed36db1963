#include "cavtool/layered_optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cavtool/errors.hpp"

namespace cavtool {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_index(complexd n, const std::string& where) {
  if (!(n.real() > 0.0) || !(n.imag() >= 0.0)) {
    throw std::invalid_argument(where + ": index must have Re > 0, Im >= 0");
  }
}

void validate_stack(const LayerStack& stack, double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) {
    throw std::invalid_argument("wavelength must be positive");
  }
  validate_index(stack.incident_index, "incident medium");
  validate_index(stack.exit_index, "exit medium");
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    if (!(stack.layers[i].thickness_nm >= 0.0)) {
      throw std::invalid_argument("layer " + std::to_string(i) +
                                  ": thickness must be >= 0");
    }
    validate_index(stack.layers[i].index, "layer " + std::to_string(i));
  }
}

complexd wavenumber(complexd index, double wavelength_nm) {
  return kTwoPi * index / wavelength_nm;
}

double wrap_to_pi(double phase) {
  double w = std::remainder(phase, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

}  // namespace

Mat2c operator*(const Mat2c& lhs, const Mat2c& rhs) {
  return Mat2c{lhs.m00 * rhs.m00 + lhs.m01 * rhs.m10,
               lhs.m00 * rhs.m01 + lhs.m01 * rhs.m11,
               lhs.m10 * rhs.m00 + lhs.m11 * rhs.m10,
               lhs.m10 * rhs.m01 + lhs.m11 * rhs.m11};
}

complexd det(const Mat2c& m) { return m.m00 * m.m11 - m.m01 * m.m10; }

Mat2c propagation_matrix(const Layer& layer, double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) {
    throw std::invalid_argument("wavelength must be positive");
  }
  if (!(layer.thickness_nm >= 0.0)) {
    throw std::invalid_argument("layer thickness must be >= 0");
  }
  validate_index(layer.index, "layer");
  const complexd phase =
      wavenumber(layer.index, wavelength_nm) * layer.thickness_nm;
  const complexd i{0.0, 1.0};
  // Maps amplitudes referenced to the layer's exit interface back to the
  // entry interface: A picks up e^{-i phi}, B picks up e^{+i phi}.
  return Mat2c{std::exp(-i * phase), 0.0, 0.0, std::exp(i * phase)};
}

Mat2c interface_matrix(complexd n_from, complexd n_to) {
  validate_index(n_from, "interface entry medium");
  validate_index(n_to, "interface exit medium");
  const complexd r = (n_from - n_to) / (n_from + n_to);
  const complexd t = 2.0 * n_from / (n_from + n_to);
  return Mat2c{1.0 / t, r / t, r / t, 1.0 / t};
}

Mat2c transfer_matrix(const LayerStack& stack, double wavelength_nm) {
  validate_stack(stack, wavelength_nm);
  complexd n_prev = stack.incident_index;
  Mat2c m;
  for (const Layer& layer : stack.layers) {
    m = m * interface_matrix(n_prev, layer.index);
    m = m * propagation_matrix(layer, wavelength_nm);
    n_prev = layer.index;
  }
  return m * interface_matrix(n_prev, stack.exit_index);
}

StackResponse stack_response(const LayerStack& stack, double wavelength_nm) {
  const Mat2c m = transfer_matrix(stack, wavelength_nm);
  StackResponse out;
  out.r = m.m10 / m.m00;
  out.t = 1.0 / m.m00;
  out.reflectance = std::norm(out.r);
  out.transmittance = stack.exit_index.real() / stack.incident_index.real() *
                      std::norm(out.t);
  out.phase_on_reflection = std::arg(out.r);
  return out;
}

LayerStack reversed(const LayerStack& stack) {
  LayerStack out;
  out.incident_index = stack.exit_index;
  out.exit_index = stack.incident_index;
  out.layers.assign(stack.layers.rbegin(), stack.layers.rend());
  return out;
}

std::vector<std::pair<complexd, complexd>> layer_amplitudes(
    const LayerStack& stack, double wavelength_nm) {
  validate_stack(stack, wavelength_nm);
  const std::size_t n = stack.layers.size();
  // Backward pass from a unit forward wave in the exit medium; entry j holds
  // (A, B) referenced to the entry interface of region j.
  std::vector<std::pair<complexd, complexd>> amps(n + 2);
  complexd a{1.0, 0.0}, b{0.0, 0.0};
  amps[n + 1] = {a, b};
  complexd n_next = stack.exit_index;
  for (std::size_t j = n; j-- > 0;) {
    const Layer& layer = stack.layers[j];
    Mat2c m = interface_matrix(layer.index, n_next);
    complexd ar = m.m00 * a + m.m01 * b;  // amplitudes at the exit interface
    complexd br = m.m10 * a + m.m11 * b;
    Mat2c p = propagation_matrix(layer, wavelength_nm);
    a = p.m00 * ar;
    b = p.m11 * br;
    amps[j + 1] = {a, b};
    n_next = layer.index;
  }
  Mat2c m = interface_matrix(stack.incident_index, n_next);
  complexd a_in = m.m00 * a + m.m01 * b;
  complexd b_in = m.m10 * a + m.m11 * b;
  amps[0] = {a_in, b_in};
  // Normalize to unit incident amplitude.
  for (auto& [fa, fb] : amps) {
    fa /= a_in;
    fb /= a_in;
  }
  return amps;
}

namespace {

struct Regions {
  std::vector<double> entry_nm;  // entry interface of each region
  std::vector<complexd> index;
  double total_nm = 0.0;
};

Regions region_table(const LayerStack& stack) {
  Regions r;
  r.entry_nm.push_back(0.0);  // incident medium, open towards z < 0
  r.index.push_back(stack.incident_index);
  double z = 0.0;
  for (const Layer& layer : stack.layers) {
    r.entry_nm.push_back(z);
    r.index.push_back(layer.index);
    z += layer.thickness_nm;
  }
  r.entry_nm.push_back(z);
  r.index.push_back(stack.exit_index);
  r.total_nm = z;
  return r;
}

complexd field_in_region(const Regions& regions,
                         const std::vector<std::pair<complexd, complexd>>& amps,
                         double wavelength_nm, std::size_t region, double z) {
  const complexd k = wavenumber(regions.index[region], wavelength_nm);
  const complexd i{0.0, 1.0};
  const double dz = z - regions.entry_nm[region];
  return amps[region].first * std::exp(i * k * dz) +
         amps[region].second * std::exp(-i * k * dz);
}

std::size_t region_of(const Regions& regions, double z, std::size_t n_layers) {
  if (z < 0.0) return 0;
  if (z >= regions.total_nm) return n_layers + 1;
  // entry_nm[1..n] are the layer entries, sorted.
  std::size_t lo = 1, hi = n_layers;
  while (lo < hi) {
    std::size_t mid = (lo + hi + 1) / 2;
    if (regions.entry_nm[mid] <= z) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

}  // namespace

complexd field_at(const LayerStack& stack, double wavelength_nm, double z_nm) {
  const auto amps = layer_amplitudes(stack, wavelength_nm);
  const Regions regions = region_table(stack);
  return field_in_region(regions, amps, wavelength_nm,
                         region_of(regions, z_nm, stack.layers.size()), z_nm);
}

FieldProfile field_profile(const LayerStack& stack, double wavelength_nm,
                           double step_nm, double margin_nm) {
  if (!(step_nm > 0.0) || margin_nm < 0.0) {
    throw std::invalid_argument("field_profile: step must be > 0, margin >= 0");
  }
  const auto amps = layer_amplitudes(stack, wavelength_nm);
  const Regions regions = region_table(stack);
  const std::size_t n = stack.layers.size();

  FieldProfile out;
  for (double z = -margin_nm; z <= regions.total_nm + margin_nm + 0.5 * step_nm;
       z += step_nm) {
    const std::size_t region = region_of(regions, z, n);
    out.position_nm.push_back(z);
    out.intensity.push_back(
        std::norm(field_in_region(regions, amps, wavelength_nm, region, z)));
    const complexd idx = regions.index[region];
    out.permittivity.push_back((idx * idx).real());
  }

  // Interfaces: classify |E|^2 against the incident-side medium's envelope.
  for (std::size_t j = 1; j <= n + 1; ++j) {
    const double zi = regions.entry_nm[j];
    out.interface_position_nm.push_back(zi);
    const std::size_t left = j - 1;
    const double mag_a = std::abs(amps[left].first);
    const double mag_b = std::abs(amps[left].second);
    const double env_max = (mag_a + mag_b) * (mag_a + mag_b);
    const double env_min = (mag_a - mag_b) * (mag_a - mag_b);
    const double range = env_max - env_min;
    const double v = std::norm(
        field_in_region(regions, amps, wavelength_nm, left, zi));
    InterfaceField kind = InterfaceField::kNeither;
    if (range > 1e-9 * env_max) {
      if (v >= env_max - 0.05 * range) {
        kind = InterfaceField::kAntinode;
      } else if (v <= env_min + 0.05 * range) {
        kind = InterfaceField::kNode;
      }
    }
    out.interface_kind.push_back(kind);
  }
  return out;
}

AxialEnergy axial_energy(const LayerStack& stack, double wavelength_nm) {
  const auto amps = layer_amplitudes(stack, wavelength_nm);
  const Regions regions = region_table(stack);
  AxialEnergy out;
  for (std::size_t j = 0; j < stack.layers.size(); ++j) {
    const Layer& layer = stack.layers[j];
    const complexd a = amps[j + 1].first;
    const complexd b = amps[j + 1].second;
    const double d = layer.thickness_nm;
    const double eps = (layer.index * layer.index).real();
    const double z0 = regions.entry_nm[j + 1];

    if (layer.index.imag() == 0.0) {
      const double k = kTwoPi * layer.index.real() / wavelength_nm;
      const double mag_a = std::abs(a), mag_b = std::abs(b);
      const double cross = std::abs(a * std::conj(b));
      const double delta = std::arg(a * std::conj(b));
      // |E|^2 = |A|^2 + |B|^2 + 2 |A||B| cos(2 k z + delta)
      double integral = (mag_a * mag_a + mag_b * mag_b) * d;
      if (k > 0.0) {
        integral += cross / k * (std::sin(2.0 * k * d + delta) -
                                 std::sin(delta));
      }
      out.integral_nm += eps * integral;

      double peak = 0.0, peak_z = 0.0;
      if (cross == 0.0) {
        peak = mag_a * mag_a + mag_b * mag_b;
        peak_z = 0.0;
      } else {
        // First in-layer position where the cosine reaches +1.
        double z_star = std::remainder(-delta, kTwoPi) / (2.0 * k);
        while (z_star < 0.0) z_star += std::numbers::pi / k;
        if (z_star <= d) {
          peak = (mag_a + mag_b) * (mag_a + mag_b);
          peak_z = z_star;
        } else {
          const double at_0 =
              mag_a * mag_a + mag_b * mag_b + 2.0 * cross * std::cos(delta);
          const double at_d = mag_a * mag_a + mag_b * mag_b +
                              2.0 * cross * std::cos(2.0 * k * d + delta);
          peak = std::max(at_0, at_d);
          peak_z = at_0 >= at_d ? 0.0 : d;
        }
      }
      if (eps * peak > out.peak) {
        out.peak = eps * peak;
        out.peak_position_nm = z0 + peak_z;
        out.peak_permittivity = eps;
      }
    } else {
      // Absorbing layer: sampled trapezoid, ~40 points per wavelength.
      const double step =
          wavelength_nm / (40.0 * layer.index.real());
      const int n_steps = std::max(2, static_cast<int>(d / step) + 1);
      double prev = std::norm(field_in_region(regions, amps, wavelength_nm,
                                              j + 1, z0));
      if (eps * prev > out.peak) {
        out.peak = eps * prev;
        out.peak_position_nm = z0;
        out.peak_permittivity = eps;
      }
      for (int s = 1; s <= n_steps; ++s) {
        const double z = z0 + d * s / n_steps;
        const double cur = std::norm(
            field_in_region(regions, amps, wavelength_nm, j + 1, z));
        out.integral_nm += eps * 0.5 * (prev + cur) * (d / n_steps);
        if (eps * cur > out.peak) {
          out.peak = eps * cur;
          out.peak_position_nm = z;
          out.peak_permittivity = eps;
        }
        prev = cur;
      }
    }
  }
  return out;
}

BraggDesign design_bragg_mirror(double target_transmittance,
                                double wavelength_nm, double n_high,
                                double n_low, MirrorTermination termination,
                                double n_substrate) {
  if (!(target_transmittance > 0.0)) {
    throw std::invalid_argument("target transmittance must be positive");
  }
  if (!(wavelength_nm > 0.0)) {
    throw std::invalid_argument("design wavelength must be positive");
  }
  if (!(n_high > 0.0) || !(n_low > 0.0) || !(n_substrate > 0.0)) {
    throw std::invalid_argument("indices must be positive");
  }
  if (n_high < n_low) {
    throw std::invalid_argument("requires n_high >= n_low");
  }

  const Layer high{wavelength_nm / (4.0 * n_high), complexd{n_high, 0.0}};
  const Layer low{wavelength_nm / (4.0 * n_low), complexd{n_low, 0.0}};

  constexpr int kMaxPairs = 2000;
  double previous = 2.0;  // larger than any physical transmittance
  for (int pairs = 0; pairs <= kMaxPairs; ++pairs) {
    LayerStack stack;
    stack.incident_index = complexd{1.0, 0.0};
    stack.exit_index = complexd{n_substrate, 0.0};
    if (termination == MirrorTermination::kLowIndex) {
      stack.layers.push_back(low);
    }
    for (int p = 0; p < pairs; ++p) {
      stack.layers.push_back(high);
      stack.layers.push_back(low);
    }
    const double t = stack_response(stack, wavelength_nm).transmittance;
    if (t <= target_transmittance) {
      return BraggDesign{std::move(stack), pairs, t};
    }
    // The first pair under a low-index cap can raise T (the cap is
    // antireflective until the stack beneath it reflects); stagnation only
    // counts from the second pair on.
    if (pairs > 1 && t >= previous) {
      throw DesignInfeasibleError(
          "adding quarter-wave pairs no longer reduces transmission (T = " +
          std::to_string(t) + " at " + std::to_string(pairs) + " pairs)");
    }
    previous = t;
  }
  throw DesignInfeasibleError("target transmission unreachable within 2000 pairs");
}

double penetration_depth_nm(const LayerStack& stack, double wavelength_nm,
                            double delta_nm) {
  if (!(delta_nm > 0.0)) {
    throw std::invalid_argument("delta must be positive");
  }
  const double hi =
      stack_response(stack, wavelength_nm + delta_nm).phase_on_reflection;
  const double lo =
      stack_response(stack, wavelength_nm - delta_nm).phase_on_reflection;
  const double dphi_dlambda = wrap_to_pi(hi - lo) / (2.0 * delta_nm);
  return -wavelength_nm * wavelength_nm / (2.0 * kTwoPi) * dphi_dlambda;
}

}  // namespace cavtool
