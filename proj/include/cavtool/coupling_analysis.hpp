#ifndef CAVTOOL_COUPLING_ANALYSIS_HPP
#define CAVTOOL_COUPLING_ANALYSIS_HPP

#include <vector>

#include "cavtool/cavity_model.hpp"
#include "cavtool/quantity.hpp"

namespace cavtool {

// Detection-efficiency correction: measured / efficiency.
Quantity corrected_rate(const Quantity& measured_per_s,
                        const Quantity& efficiency);

// Peak of a Lorentzian line carrying the given total rate:
// 2 rate / (pi fwhm), in 1/s per GHz.
Quantity peak_spectral_density(const Quantity& rate_per_s,
                               const Quantity& fwhm_ghz);

// Fraction of the total emission funneled into the cavity mode:
// I_cav / (I_free + I_cav).
Quantity beta_from_rates(const Quantity& cavity_rate_per_s,
                         const Quantity& free_rate_per_s);

// Purcell factor implied by a measured beta for an emitter much broader than
// the cavity: F_p = (zpl_fwhm / (xi kappa)) beta, with xi the fraction of
// emission in the line the cavity addresses.
Quantity purcell_from_beta(const Quantity& zpl_fwhm_thz,
                           const Quantity& cavity_linewidth_ghz, double xi,
                           const Quantity& beta);

struct EnhancementProjection {
  Quantity lifetime_reduction;  // 1 + xi F_p
  Quantity zpl_fraction;        // xi (1 + F_p) / (1 + xi F_p)
};

// Projected effect of a Fourier-limited emitter with the same F_p.
EnhancementProjection project_enhancement(const Quantity& purcell, double xi);

Quantity quantum_efficiency(const Quantity& observed_rate_per_s,
                            const Quantity& predicted_rate_per_s);

// Funneling simulation for a broad emitter in the membrane cavity.
//
// beta = R_cav / (R_cav + gamma_free) with R_cav = 4 g^2 / (kappa + gamma_star
// + gamma_free). g comes from the vacuum field of the resonant mode at the
// emitter position: g^2 = [3 pi c^3 gamma_free / (2 n_e^3 omega^2 V)]
// * orientation * relative_field, where V is the max-normalized mode volume
// of the full stack (mirrors included) and relative_field =
// eps(z_e)|E(z_e)|^2 / max(eps |E|^2). An emitter at a field node has g = 0
// and beta = 0 exactly. Unit quantum efficiency and an in-plane averaged
// dipole (orientation factor 1/2) are assumed throughout.
class BetaSimulator {
 public:
  // finesse sets kappa through the effective length of the assembled cavity.
  BetaSimulator(CavityAssembly assembly, double finesse);

  struct Sample {
    double beta = 0.0;
    double coupling_g_per_s = 0.0;   // angular
    double kappa_per_s = 0.0;        // angular
    double mode_volume_um3 = 0.0;
    double relative_field = 0.0;
    double resonant_air_gap_um = 0.0;
    double membrane_top_intensity = 0.0;  // |E|^2 at the air side, peak = 1
  };

  // Puts the one-dimensional stack on resonance for the requested
  // longitudinal order at the geometry's wavelength (the Gouy-corrected gap
  // would detune the plane-wave field solve by many linewidths), then
  // evaluates the emitter at geometry.emitter_depth_nm (measured from the
  // flat-mirror/membrane interface).
  Sample evaluate(const CavityGeometry& geometry, ModeIndex mode,
                  double zpl_fwhm_thz, double lifetime_ns) const;

  static double beta_from_field(double relative_field, double mode_volume_um3,
                                double wavelength_nm, double index_at_emitter,
                                double zpl_fwhm_thz, double lifetime_ns,
                                double kappa_per_s);

  const CavityAssembly& assembly() const { return assembly_; }
  double finesse() const { return finesse_; }

 private:
  CavityAssembly assembly_;
  double finesse_;
};

struct BetaScanRequest {
  double thickness_lo_nm = 0.0, thickness_hi_nm = 0.0;
  int thickness_samples = 0;
  // Implantation depth below the membrane-top (air-side) surface, the face
  // ions enter during fabrication; the distance from the mirror interface is
  // therefore thickness - depth and shifts with the thickness axis.
  double depth_center_nm = 0.0, depth_sigma_nm = 0.0;
  int depth_samples = 0;  // spread over depth_center +- 2 sigma
  ModeIndex mode;
  double zpl_fwhm_thz = 0.0;
  double lifetime_ns = 0.0;
  int threads = 0;  // 0: CAVTOOL_THREADS if set, else hardware concurrency
};

struct BetaScanResult {
  std::vector<double> thickness_nm;
  std::vector<double> depth_nm;  // below the membrane-top surface
  std::vector<double> beta;  // row-major [i_thickness * n_depth + i_depth]
};

// Membrane-thickness sweep; the resonance is re-solved per thickness, the
// depth column reuses it. Output is identical for any thread count.
BetaScanResult beta_scan(const BetaSimulator& simulator,
                         const CavityGeometry& base,
                         const BetaScanRequest& request);

}  // namespace cavtool

#endif  // CAVTOOL_COUPLING_ANALYSIS_HPP
