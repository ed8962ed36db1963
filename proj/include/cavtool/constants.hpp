#ifndef CAVTOOL_CONSTANTS_HPP
#define CAVTOOL_CONSTANTS_HPP

#include <map>
#include <string>

namespace cavtool {

// Single versioned home for every physical constant and default material
// parameter used by the toolkit. Reports echo this table so that numbers in
// an output file can always be traced to the constants they were computed
// with. Bump kConstantsVersion whenever a value changes.
inline constexpr char kConstantsVersion[] = "1.0";

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s, exact

// Refractive indices at 603 nm, dispersion neglected by default.
inline constexpr double kIndexDiamond = 2.41;
inline constexpr double kIndexSilica = 1.46;   // SiO2, also the mirror substrate
inline constexpr double kIndexTantala = 2.10;  // Ta2O5

// Fraction of emission that goes into the zero-phonon line at 5 K.
inline constexpr double kZplBranchingRatio = 0.6;

// In-plane dipole orientation average relative to a fixed linear cavity
// polarization: <cos^2 theta> = 1/2.
inline constexpr double kDipoleOrientationFactor = 0.5;

inline std::map<std::string, double> constants_table() {
  return {
      {"speed_of_light_m_per_s", kSpeedOfLight},
      {"index_diamond", kIndexDiamond},
      {"index_silica", kIndexSilica},
      {"index_tantala", kIndexTantala},
      {"zpl_branching_ratio", kZplBranchingRatio},
      {"dipole_orientation_factor", kDipoleOrientationFactor},
  };
}

}  // namespace cavtool

#endif  // CAVTOOL_CONSTANTS_HPP
