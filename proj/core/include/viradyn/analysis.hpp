#pragma once

#include <array>
#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "viradyn/model.hpp"

namespace viradyn {

using Complex = std::complex<double>;
using Vector3 = std::array<double, 3>;
using ComplexVector3 = std::array<Complex, 3>;

/// Dense 3x3 real matrix, row-major.
struct Matrix3 {
  std::array<double, 9> entries{};

  static Matrix3 identity();
  static Matrix3 diagonal(double a, double b, double c);
  static Matrix3 from_rows(const Vector3& r0, const Vector3& r1, const Vector3& r2);

  double operator()(std::size_t row, std::size_t col) const { return entries[3 * row + col]; }
  double& operator()(std::size_t row, std::size_t col) { return entries[3 * row + col]; }

  double trace() const;
  double determinant() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Vector3 operator*(const Vector3& x) const;
  ComplexVector3 operator*(const ComplexVector3& x) const;

  bool operator==(const Matrix3&) const = default;
};

/// Entries rounded half-away-from-zero to `decimals` decimal places.
Matrix3 round_entries(const Matrix3& m, int decimals);

enum class EquilibriumKind { Uninfected, Infected };
std::string_view to_string(EquilibriumKind kind);

struct Equilibrium {
  SystemState point;
  EquilibriumKind kind = EquilibriumKind::Uninfected;
};

/// Critical points of the model with efficacies frozen.
///
/// The uninfected point (s/d, 0, 0) is always returned. The infected point
///   (m1 m2 / (k b), s/m2 - d m1 / (b k), k s / (m1 m2) - d / b)
/// with b, k replaced by the treated rates is appended only when both rates are
/// positive and the infected components come out strictly positive.
std::vector<Equilibrium> equilibria(const ModelParams& params, Efficacy efficacy, ModelKind kind);

/// Jacobian of the frozen-efficacy right-hand side at `point`:
///   [[-d - b V, 0, -b T], [b V, -m2, b T], [0, k, -m1]]
Matrix3 jacobian(const ModelParams& params, Efficacy efficacy, ModelKind kind,
                 const SystemState& point);

/// Eigenvalues paired by index with eigenvectors.
///
/// Eigenvalues are sorted by descending real part, then descending |imag|,
/// then descending imag, so conjugate pairs sit next to each other with the
/// positive imaginary part first. Each eigenvector has its last component
/// scaled to 1, or, when that is zero, its largest-magnitude component.
struct EigenDecomposition {
  std::array<Complex, 3> values;
  std::array<ComplexVector3, 3> vectors;
};

/// Eigen-decomposition of a real 3x3 matrix from the roots of its
/// characteristic cubic, with eigenvectors from the null space of A - lambda I.
/// Throws DefectiveMatrixError for a repeated eigenvalue lacking a full
/// eigenspace, DomainError for non-finite input.
EigenDecomposition eigen3(const Matrix3& a);

/// Roots of lambda^3 + c2 lambda^2 + c1 lambda + c0, sorted like eigen3's output.
std::array<Complex, 3> cubic_roots(double c2, double c1, double c0);

enum class Stability { AsymptoticallyStable, Unstable, NonHyperbolic };
std::string_view to_string(Stability stability);

struct StabilityReport {
  Stability classification = Stability::NonHyperbolic;
  bool hyperbolic = false;
  double spectral_abscissa = 0.0;
};

inline constexpr double kStabilityTolerance = 1e-10;

StabilityReport classify(std::span<const Complex> eigenvalues,
                         double tolerance = kStabilityTolerance);
StabilityReport classify(const EigenDecomposition& eig, double tolerance = kStabilityTolerance);

struct LinearMode {
  Complex lambda;
  ComplexVector3 vector;
  Complex coefficient;
};

/// X(t) = sum_i c_i V_i exp(lambda_i t), the solution of dX/dt = A X.
struct LinearizedSolution {
  std::array<LinearMode, 3> modes;

  ComplexVector3 evaluate_complex(double t) const;
};

inline constexpr double kMaxEigenbasisCondition = 1e8;

/// Fits c from [V1 V2 V3] c = x0. Throws ConditioningError when the
/// eigenvector matrix has infinity-norm condition number >= 1e8.
LinearizedSolution fit_linearized(const EigenDecomposition& eig, const Vector3& x0);

/// Real part of the modal sum at time t.
Vector3 evaluate_linearized(const LinearizedSolution& solution, double t);

}  // namespace viradyn
