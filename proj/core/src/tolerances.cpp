#include "geobeam/tolerances.hpp"

namespace geobeam {

const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace geobeam
