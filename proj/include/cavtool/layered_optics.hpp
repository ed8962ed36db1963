#ifndef CAVTOOL_LAYERED_OPTICS_HPP
#define CAVTOOL_LAYERED_OPTICS_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace cavtool {

using complexd = std::complex<double>;

// Plane-wave transfer matrices for dielectric stacks at normal incidence.
//
// Conventions (fixed project-wide):
//   - forward propagation is e^{+ikz}, time dependence e^{-i w t};
//   - absorbing media therefore have Im(n) >= 0;
//   - a field in layer j is E(z) = A e^{+ik(z-z_j)} + B e^{-ik(z-z_j)} with
//     z_j the layer's entry interface and k = 2 pi n / lambda;
//   - amplitude vectors are (A, B), and matrices map the exit-side vector to
//     the incident-side vector.

struct Layer {
  double thickness_nm = 0.0;   // >= 0; zero propagates as the identity
  complexd index = {1.0, 0.0};  // Re > 0, Im >= 0
};

// Layers are ordered from the incident side towards the exit side. The two
// outer media are semi-infinite.
struct LayerStack {
  complexd incident_index = {1.0, 0.0};
  complexd exit_index = {1.0, 0.0};
  std::vector<Layer> layers;
};

struct Mat2c {
  complexd m00{1.0, 0.0}, m01{0.0, 0.0};
  complexd m10{0.0, 0.0}, m11{1.0, 0.0};
};

Mat2c operator*(const Mat2c& lhs, const Mat2c& rhs);
complexd det(const Mat2c& m);

// Free propagation across one layer. det = 1 exactly; the accumulated
// one-way phase is 2 pi n d / lambda.
Mat2c propagation_matrix(const Layer& layer, double wavelength_nm);

// Boundary between two media. Fresnel amplitudes at normal incidence:
// r = (n_from - n_to) / (n_from + n_to), t = 2 n_from / (n_from + n_to).
// interface_matrix(a, b) * interface_matrix(b, a) is the identity.
Mat2c interface_matrix(complexd n_from, complexd n_to);

// Full stack matrix including both outer-medium boundaries. Composing the
// matrices of two stacks that share an intermediate medium equals the matrix
// of the concatenated stack.
Mat2c transfer_matrix(const LayerStack& stack, double wavelength_nm);

struct StackResponse {
  complexd r;                      // reflection amplitude, incident side
  complexd t;                      // transmission amplitude into the exit medium
  double reflectance = 0.0;        // |r|^2
  double transmittance = 0.0;      // Re(n_exit)/Re(n_in) |t|^2
  double phase_on_reflection = 0;  // arg(r), principal value in (-pi, pi]
};

// reflectance + transmittance = 1 for lossless stacks (checked in tests to
// 1e-10, not enforced here so absorbing stacks remain representable).
StackResponse stack_response(const LayerStack& stack, double wavelength_nm);

// Stack as seen from the exit side (layers reversed, outer media swapped).
// Lossless stacks transmit identically in both directions.
LayerStack reversed(const LayerStack& stack);

enum class InterfaceField {
  kNode,      // within 5% of the local standing-wave minimum
  kAntinode,  // within 5% of the local standing-wave maximum
  kNeither,
};

// Standing-wave intensity |E(z)|^2 for unit incident amplitude. z = 0 at the
// first interface and grows towards the exit; margin_nm of the two outer
// media is included on both ends. Interfaces are classified against the
// standing-wave envelope of the medium on their incident side, with the 5%
// bands measured as a fraction of the local max-min range.
struct FieldProfile {
  std::vector<double> position_nm;
  std::vector<double> intensity;
  std::vector<double> permittivity;  // Re(n^2) at each position
  std::vector<double> interface_position_nm;
  std::vector<InterfaceField> interface_kind;
};

FieldProfile field_profile(const LayerStack& stack, double wavelength_nm,
                           double step_nm = 1.0, double margin_nm = 0.0);

// Complex field at a single axial position (same z origin as field_profile).
complexd field_at(const LayerStack& stack, double wavelength_nm, double z_nm);

// Per-layer amplitudes (A, B) normalized to unit incident amplitude; entry 0
// is the incident medium, entry layers.size()+1 the exit medium.
std::vector<std::pair<complexd, complexd>> layer_amplitudes(
    const LayerStack& stack, double wavelength_nm);

// Closed-form energy bookkeeping over the finite layers (the semi-infinite
// outer media are excluded): integral of eps |E|^2 dz, its maximum, and where
// the maximum sits. Lossless layers are integrated exactly; absorbing layers
// fall back to fine sampling.
struct AxialEnergy {
  double integral_nm = 0.0;        // integral of eps |E|^2 dz
  double peak = 0.0;               // max of eps |E|^2
  double peak_position_nm = 0.0;   // absolute z of the maximum
  double peak_permittivity = 0.0;  // eps of the layer holding the maximum
};

AxialEnergy axial_energy(const LayerStack& stack, double wavelength_nm);

enum class MirrorTermination {
  kHighIndex,  // outermost (incident-side) layer is n_high: node at surface
  kLowIndex,   // one extra low-index layer on top: antinode at surface
};

struct BraggDesign {
  LayerStack stack;          // incident side = cavity side, exit = substrate
  int pair_count = 0;        // (high, low) quarter-wave pairs
  double transmittance = 1;  // at the design wavelength
};

// Smallest quarter-wave stack whose transmission at wavelength_nm does not
// exceed target_transmittance. Low-index termination prepends a single extra
// low-index quarter-wave layer to the high-terminated stack. Throws
// DesignInfeasibleError when adding pairs stops reducing the transmission
// before the target is met.
BraggDesign design_bragg_mirror(double target_transmittance,
                                double wavelength_nm, double n_high,
                                double n_low, MirrorTermination termination,
                                double n_substrate);

// Principal-value reflection phase unwrapped locally; d(phase)/d(lambda) by
// central difference. Penetration depth -lambda^2/(4 pi) d(phase)/d(lambda)
// is the extra one-way length a cavity's free spectral range sees.
double penetration_depth_nm(const LayerStack& stack, double wavelength_nm,
                            double delta_nm = 1e-3);

}  // namespace cavtool

#endif  // CAVTOOL_LAYERED_OPTICS_HPP
