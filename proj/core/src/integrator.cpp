#include "viradyn/integrator.hpp"

#include <cmath>
#include <sstream>

namespace viradyn {
namespace {

constexpr double kMeshRelTol = 1e-9;

}  // namespace

std::size_t MeshSpec::steps() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(h)) {
    throw ConfigError("mesh bounds and step must be finite");
  }
  if (!(a < b)) {
    std::ostringstream os;
    os << "mesh requires a < b, got a=" << a << " b=" << b;
    throw ConfigError(os.str());
  }
  if (!(h > 0.0)) {
    std::ostringstream os;
    os << "mesh step h must be > 0, got " << h;
    throw ConfigError(os.str());
  }
  const double ratio = (b - a) / h;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > kMeshRelTol * rounded) {
    std::ostringstream os;
    os.precision(17);
    os << "mesh step h=" << h << " does not divide [" << a << ", " << b << "] into a whole "
       << "number of steps ((b-a)/h = " << ratio << ")";
    throw ConfigError(os.str());
  }
  return static_cast<std::size_t>(rounded);
}

bool MeshSpec::is_mesh_point(double t) const {
  const double ratio = (t - a) / h;
  const double rounded = std::round(ratio);
  return rounded >= 0.0 && std::abs(ratio - rounded) <= kMeshRelTol * std::max(1.0, rounded);
}

std::size_t MeshSpec::index_of(double t) const {
  if (!is_mesh_point(t)) {
    std::ostringstream os;
    os << "time " << t << " is not a mesh point of [" << a << ", " << b << "] with h=" << h;
    throw ConfigError(os.str());
  }
  return static_cast<std::size_t>(std::round((t - a) / h));
}

}  // namespace viradyn
