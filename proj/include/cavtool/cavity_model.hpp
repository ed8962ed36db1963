#ifndef CAVTOOL_CAVITY_MODEL_HPP
#define CAVTOOL_CAVITY_MODEL_HPP

#include <vector>

#include "cavtool/constants.hpp"
#include "cavtool/layered_optics.hpp"

namespace cavtool {

// Plano-concave microcavity: a curved mirror (radius R) facing a flat mirror
// that carries a single-crystal membrane bonded to its top surface. The
// emitter sits inside the membrane at a fixed depth from the mirror side.
//
// Length bookkeeping (two different equivalent lengths, easy to conflate):
//   - Gaussian-beam diffraction sees air_gap + t/n (a slab of index n acts
//     like free space of length t/n). Used for waist and Gouy phase.
//   - The round-trip phase sees the optical path air_gap + n t plus the
//     penetration into each mirror. Used for FSR and effective length.
struct CavityGeometry {
  double mirror_radius_um = 0.0;        // curved-mirror radius of curvature
  double air_gap_um = 0.0;              // mirror face to membrane top surface
  double membrane_thickness_nm = 0.0;   // 0 for a bare cavity
  double membrane_index = kIndexDiamond;
  double emitter_depth_nm = 0.0;        // from the flat-mirror interface
  double wavelength_nm = 603.0;
};

struct ModeIndex {
  int longitudinal_m = 0;  // half-waves of round-trip phase / 2 pi
  int transverse_q = 0;    // radially symmetric transverse order
};

struct GaussianMode {
  double waist_radius_um = 0.0;
  double rayleigh_range_um = 0.0;
  double gouy_phase_per_pass_rad = 0.0;
  // Distance from the curved mirror face to the waist plane. The waist of a
  // plano-concave resonator sits on the flat side, so this equals the
  // diffraction length air_gap + t/n.
  double waist_position_um = 0.0;
};

double diffraction_length_um(const CavityGeometry& geometry);

// Fundamental-mode parameters; the waist sits on the flat mirror.
// w0^2 = (lambda / pi) sqrt(L_eq (R - L_eq)). Throws StabilityError unless
// 0 < L_eq < R.
GaussianMode gaussian_mode(const CavityGeometry& geometry);

// The two mirror coatings, both described from the intracavity (air) side.
// ideal = true stands in for perfect conductors (|r| = 1, phase pi); only
// phase-based operations are then available.
struct CavityAssembly {
  LayerStack flat_mirror;
  LayerStack fiber_mirror;
  bool ideal = false;
};

CavityAssembly ideal_mirrors();

// Membrane bonded onto the flat mirror, seen from the air gap.
LayerStack bottom_assembly(const CavityAssembly& assembly,
                           const CavityGeometry& geometry);

// Everything between the two substrates, illuminated from the flat-mirror
// substrate, with the air gap as an explicit layer. Evaluating this stack at
// a resonant air gap yields the intracavity standing wave.
LayerStack full_cavity_stack(const CavityAssembly& assembly,
                             const CavityGeometry& geometry,
                             double air_gap_um);

// Round-trip phase at the given air gap:
//   4 pi L_air / lambda + (phi_bottom - pi) + (phi_fiber - pi)
//   - 2 (q + 1) psi_Gouy,
// with reflection phases referenced to the perfect-conductor value pi so
// ideal mirrors reproduce L = m lambda / 2. Resonances are the solutions of
// phase = 2 pi m; the membrane's whole half-waves fold into the air-gap
// solution (phase-on-reflection is a principal value), so m labels follow
// m ~= 2 L_air / lambda.
double round_trip_phase_rad(const CavityAssembly& assembly,
                            const CavityGeometry& geometry,
                            double air_gap_um, int transverse_q);

// Bisection over the stable range; |phase - 2 pi m| < 1e-9 rad at the
// returned gap. Throws RootNotFoundError when the order m does not fit.
double resonant_air_gap_um(const CavityAssembly& assembly,
                           const CavityGeometry& geometry, ModeIndex mode);

// Same solve with the Gouy term dropped: the gap that puts the
// one-dimensional layer stack itself on resonance. The Gouy correction moves
// the physical gap by only a fraction of a wavelength, but at high finesse
// that offset detunes a plane-wave field calculation by many linewidths, so
// field and mode-volume work must use this gap.
double plane_wave_resonant_air_gap_um(const CavityAssembly& assembly,
                                      const CavityGeometry& geometry,
                                      int longitudinal_m);

// First resonance of the given order scanning from lo to hi; the air gap is
// taken from the geometry. Throws RootNotFoundError if none is crossed.
double resonant_wavelength_nm(const CavityAssembly& assembly,
                              const CavityGeometry& geometry, ModeIndex mode,
                              double lo_nm, double hi_nm);

// air_gap + one-way penetration into both mirrors (the membrane's optical
// path arrives inside the bottom-assembly penetration term).
double effective_length_um(const CavityAssembly& assembly,
                           const CavityGeometry& geometry);

struct CavitySpectralParams {
  double finesse = 0.0;
  double fsr_thz = 0.0;
  double linewidth_ghz = 0.0;
  double effective_length_um = 0.0;
};

// fsr = c / (2 L_eff), linewidth = fsr / finesse. The two constructors are
// exact inverses of each other.
CavitySpectralParams spectral_params_from_length(double finesse,
                                                 double effective_length_um);
CavitySpectralParams spectral_params_from_linewidth(double finesse,
                                                    double linewidth_ghz);

// V = [ integral eps |E|^2 dz / max(eps |E|^2) ] * (pi w0^2 / 2) from the
// sampled axial profile (trapezoid rule). Scaling the profile by a constant
// leaves V unchanged.
double mode_volume_um3(const CavityGeometry& geometry,
                       const FieldProfile& axial_profile);

struct DispersionRequest {
  double air_gap_lo_um = 0.0, air_gap_hi_um = 0.0;
  int air_gap_samples = 0;
  double wavelength_lo_nm = 0.0, wavelength_hi_nm = 0.0;
  int wavelength_samples = 0;
  std::vector<int> longitudinal;  // branch orders to trace
  std::vector<int> transverse;    // transverse orders, weight 1/(1+q)
  double phase_halfwidth_rad = 0.05;
};

struct DispersionBranch {
  int longitudinal_m = 0;
  int transverse_q = 0;
  std::vector<double> wavelength_nm;
  std::vector<double> air_gap_um;
};

struct DispersionMap {
  std::vector<double> air_gap_um;    // grid rows
  std::vector<double> wavelength_nm;  // grid columns
  std::vector<double> value;          // row-major resonance proximity
  std::vector<DispersionBranch> branches;
};

// Resonance-proximity map plus traced branch curves: value(L, lambda) sums a
// Lorentzian in the wrapped round-trip phase over the requested transverse
// orders, so every longitudinal order in the window appears.
DispersionMap dispersion_scan(const CavityAssembly& assembly,
                              const CavityGeometry& geometry,
                              const DispersionRequest& request);

}  // namespace cavtool

#endif  // CAVTOOL_CAVITY_MODEL_HPP
