#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "viradyn/errors.hpp"

namespace viradyn {

template <std::size_t Dim>
using Vector = std::array<double, Dim>;

/// Uniform mesh t_j = a + j h, j = 0..N, with N = (b - a) / h.
struct MeshSpec {
  double a = 0.0;
  double b = 400.0;
  double h = 0.1;

  /// Number of steps N. Throws ConfigError unless a < b, h > 0 and
  /// (b - a) / h is an integer to 1e-9 relative.
  std::size_t steps() const;
  void validate() const { (void)steps(); }

  double time(std::size_t j) const { return a + static_cast<double>(j) * h; }

  /// Index j with time(j) == t to 1e-9 relative, or throws ConfigError.
  std::size_t index_of(double t) const;
  bool is_mesh_point(double t) const;

  bool operator==(const MeshSpec&) const = default;
};

template <std::size_t Dim>
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector<Dim>> states;

  std::size_t size() const { return times.size(); }
  bool operator==(const Trajectory&) const = default;
};

namespace detail {

template <std::size_t Dim>
void check_stage(const Vector<Dim>& k, double t, int stage) {
  for (double v : k) {
    if (!std::isfinite(v)) throw IntegrationBlowup(t, stage);
  }
}

template <std::size_t Dim>
Vector<Dim> axpy(const Vector<Dim>& w, double scale, const Vector<Dim>& k) {
  Vector<Dim> out;
  for (std::size_t i = 0; i < Dim; ++i) out[i] = w[i] + scale * k[i];
  return out;
}

template <std::size_t Dim>
Vector<Dim> scaled(double h, const Vector<Dim>& f) {
  Vector<Dim> out;
  for (std::size_t i = 0; i < Dim; ++i) out[i] = h * f[i];
  return out;
}

}  // namespace detail

/// One classical RK4 step of size h from (t, w) for the field f(t, w).
///
/// Every component of stage p is formed before stage p + 1 is evaluated.
/// Throws IntegrationBlowup if any stage vector is non-finite.
template <class Field, std::size_t Dim>
Vector<Dim> rk4_step(const Field& f, double t, const Vector<Dim>& w, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("RK4 step size must be finite and > 0");

  const Vector<Dim> k1 = detail::scaled<Dim>(h, f(t, w));
  detail::check_stage(k1, t, 1);
  const Vector<Dim> k2 = detail::scaled<Dim>(h, f(t + 0.5 * h, detail::axpy(w, 0.5, k1)));
  detail::check_stage(k2, t, 2);
  const Vector<Dim> k3 = detail::scaled<Dim>(h, f(t + 0.5 * h, detail::axpy(w, 0.5, k2)));
  detail::check_stage(k3, t, 3);
  const Vector<Dim> k4 = detail::scaled<Dim>(h, f(t + h, detail::axpy(w, 1.0, k3)));
  detail::check_stage(k4, t, 4);

  Vector<Dim> next;
  for (std::size_t i = 0; i < Dim; ++i) {
    next[i] = w[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
  }
  return next;
}

/// Mesh driver where the field may change from step to step: field_for_step(t_j)
/// yields the field used on [t_j, t_j + h]. Piecewise-in-time systems use this
/// so that a discontinuity sitting on a mesh point is never sampled by the
/// step that ends there.
template <class FieldForStep, std::size_t Dim>
Trajectory<Dim> integrate_stepwise(const FieldForStep& field_for_step, const MeshSpec& mesh,
                                   const Vector<Dim>& w0) {
  const std::size_t n = mesh.steps();
  for (std::size_t i = 0; i < Dim; ++i) {
    if (!std::isfinite(w0[i])) {
      throw NonFiniteStateError("w0[" + std::to_string(i) + "]", w0[i]);
    }
  }

  Trajectory<Dim> out;
  out.times.reserve(n + 1);
  out.states.reserve(n + 1);
  out.times.push_back(mesh.time(0));
  out.states.push_back(w0);

  for (std::size_t j = 0; j < n; ++j) {
    const double t = out.times.back();
    try {
      out.states.push_back(rk4_step(field_for_step(t), t, out.states.back(), mesh.h));
    } catch (const IntegrationBlowup& e) {
      throw e.with_step(j);
    }
    out.times.push_back(mesh.time(j + 1));
  }
  return out;
}

/// Integrate dw/dt = f(t, w) over the mesh from w0. Returns N + 1 points with
/// states[j + 1] == rk4_step(f, times[j], states[j], h).
template <class Field, std::size_t Dim>
Trajectory<Dim> integrate(const Field& f, const MeshSpec& mesh, const Vector<Dim>& w0) {
  return integrate_stepwise([&f](double) -> const Field& { return f; }, mesh, w0);
}

struct NegativeExcursion {
  std::size_t component = 0;
  std::size_t first_index = 0;  ///< first mesh index below the threshold
  double min_value = 0.0;       ///< most negative value seen for the component
  double min_time = 0.0;
};

/// Components that dip below -tolerance anywhere along the trajectory, one
/// entry per offending component. Trajectories are never clipped; this only reports.
template <std::size_t Dim>
std::vector<NegativeExcursion> find_negative_excursions(const Trajectory<Dim>& traj,
                                                        double tolerance = 1e-6) {
  std::vector<NegativeExcursion> found;
  for (std::size_t c = 0; c < Dim; ++c) {
    bool hit = false;
    NegativeExcursion ex{c, 0, 0.0, 0.0};
    for (std::size_t j = 0; j < traj.size(); ++j) {
      const double v = traj.states[j][c];
      if (v < -tolerance) {
        if (!hit) {
          ex.first_index = j;
          ex.min_value = v;
          ex.min_time = traj.times[j];
          hit = true;
        } else if (v < ex.min_value) {
          ex.min_value = v;
          ex.min_time = traj.times[j];
        }
      }
    }
    if (hit) found.push_back(ex);
  }
  return found;
}

}  // namespace viradyn
