#ifndef CAVTOOL_ERRORS_HPP
#define CAVTOOL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cavtool {

// Requested mirror cannot reach the target transmission (e.g. no index
// contrast, or adding pairs stops helping).
class DesignInfeasibleError : public std::runtime_error {
 public:
  explicit DesignInfeasibleError(const std::string& what)
      : std::runtime_error(what) {}
};

// Cavity geometry outside the stable region (equivalent length not in
// (0, R)) or otherwise unable to support a Gaussian mode.
class StabilityError : public std::runtime_error {
 public:
  explicit StabilityError(const std::string& what)
      : std::runtime_error(what) {}
};

// A root solve was asked for a solution that does not exist in the
// supplied bracket.
class RootNotFoundError : public std::runtime_error {
 public:
  explicit RootNotFoundError(const std::string& what)
      : std::runtime_error(what) {}
};

// Rate sets whose relaxation eigenvalues coincide (or form a complex
// pair): the two-exponential correlation form is not identifiable.
class DegenerateRatesError : public std::runtime_error {
 public:
  explicit DegenerateRatesError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace cavtool

#endif  // CAVTOOL_ERRORS_HPP
