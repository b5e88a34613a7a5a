#include "viradyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "viradyn/errors.hpp"

namespace viradyn {
namespace {

// Relative thresholds on the normalized cubic. Roots closer than roughly
// 1e-6 of the spectral radius are treated as one repeated root.
constexpr double kTripleRootTol = 1e-12;
constexpr double kDoubleRootTol = 1e-12;
// Pivot threshold (relative to the scaled matrix) below which A - lambda I is
// considered rank-deficient when sizing a repeated eigenvalue's eigenspace.
constexpr double kRankTol = 1e-7;

struct RootGroup {
  Complex value;
  int multiplicity = 1;
};

bool eigen_order(const Complex& x, const Complex& y) {
  if (x.real() != y.real()) return x.real() > y.real();
  if (std::abs(x.imag()) != std::abs(y.imag())) return std::abs(x.imag()) > std::abs(y.imag());
  return x.imag() > y.imag();
}

Complex eval_cubic(double a2, double a1, double a0, Complex x) {
  return ((x + a2) * x + a1) * x + a0;
}

Complex eval_cubic_derivative(double a2, double a1, Complex x) {
  return (3.0 * x + 2.0 * a2) * x + a1;
}

// Newton refinement of a simple root; keeps an iterate only if it lowers |p|.
Complex polish(double a2, double a1, double a0, Complex x) {
  for (int it = 0; it < 4; ++it) {
    const Complex fx = eval_cubic(a2, a1, a0, x);
    const Complex dfx = eval_cubic_derivative(a2, a1, x);
    if (fx == 0.0 || dfx == 0.0) break;
    const Complex next = x - fx / dfx;
    if (!(std::abs(eval_cubic(a2, a1, a0, next)) < std::abs(fx))) break;
    x = next;
  }
  return x;
}

double polish_real(double a2, double a1, double a0, double x) {
  return polish(a2, a1, a0, Complex(x, 0.0)).real();
}

// Roots of x^3 + c2 x^2 + c1 x + c0 grouped by multiplicity.
std::vector<RootGroup> cubic_root_groups(double c2, double c1, double c0) {
  if (!std::isfinite(c2) || !std::isfinite(c1) || !std::isfinite(c0)) {
    throw DomainError("cubic coefficients must be finite");
  }
  const double rho = std::max({std::abs(c2), std::sqrt(std::abs(c1)), std::cbrt(std::abs(c0))});
  if (rho == 0.0) return {{Complex(0.0), 3}};

  // Normalize so every root has modulus O(1).
  const double a2 = c2 / rho;
  const double a1 = c1 / (rho * rho);
  const double a0 = c0 / (rho * rho * rho);

  const double shift = -a2 / 3.0;
  const double p = a1 - a2 * a2 / 3.0;
  const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;

  std::vector<RootGroup> groups;
  const double half_q = q / 2.0;
  const double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;
  const double disc_scale = std::max(half_q * half_q, std::abs(third_p * third_p * third_p));

  if (std::abs(p) <= kTripleRootTol && std::abs(q) <= kTripleRootTol) {
    groups.push_back({Complex(shift), 3});
  } else if (std::abs(disc) <= kDoubleRootTol * disc_scale) {
    // x^3 + p x + q = (x - 3q/p)(x + 3q/(2p))^2 when the discriminant vanishes.
    groups.push_back({Complex(polish_real(a2, a1, a0, 3.0 * q / p + shift)), 1});
    groups.push_back({Complex(-1.5 * q / p + shift), 2});
  } else if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = -std::copysign(std::cbrt(std::abs(half_q) + sq), q);
    const double v = (u != 0.0) ? -third_p / u : 0.0;
    const double real_root = polish_real(a2, a1, a0, u + v + shift);
    Complex upper(-(u + v) / 2.0 + shift, std::sqrt(3.0) / 2.0 * std::abs(u - v));
    upper = polish(a2, a1, a0, upper);
    upper = Complex(upper.real(), std::abs(upper.imag()));
    groups.push_back({Complex(real_root), 1});
    groups.push_back({upper, 1});
    groups.push_back({std::conj(upper), 1});
  } else {
    const double m = 2.0 * std::sqrt(-third_p);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const double x = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift;
      groups.push_back({Complex(polish_real(a2, a1, a0, x)), 1});
    }
  }

  for (auto& g : groups) g.value *= rho;
  return groups;
}

using ComplexMatrix3 = std::array<ComplexVector3, 3>;

// Null-space vectors of m, treating it as having rank exactly `rank`.
// Gaussian elimination with complete pivoting; also reports pivot magnitudes.
struct Elimination {
  ComplexMatrix3 u{};
  std::array<std::size_t, 3> col{0, 1, 2};
  std::array<double, 3> pivot{};
};

Elimination eliminate(ComplexMatrix3 m) {
  Elimination e;
  for (std::size_t k = 0; k < 3; ++k) {
    std::size_t best_r = k, best_c = k;
    double best = -1.0;
    for (std::size_t r = k; r < 3; ++r) {
      for (std::size_t c = k; c < 3; ++c) {
        if (std::abs(m[r][c]) > best) {
          best = std::abs(m[r][c]);
          best_r = r;
          best_c = c;
        }
      }
    }
    std::swap(m[k], m[best_r]);
    if (best_c != k) {
      for (auto& row : m) std::swap(row[k], row[best_c]);
      std::swap(e.col[k], e.col[best_c]);
    }
    e.pivot[k] = best;
    if (best == 0.0) continue;
    for (std::size_t r = k + 1; r < 3; ++r) {
      const Complex factor = m[r][k] / m[k][k];
      for (std::size_t c = k; c < 3; ++c) m[r][c] -= factor * m[k][c];
    }
  }
  e.u = m;
  return e;
}

std::vector<ComplexVector3> null_vectors(const Elimination& e, std::size_t rank) {
  std::vector<ComplexVector3> out;
  for (std::size_t free = rank; free < 3; ++free) {
    ComplexVector3 y{};
    y[free] = 1.0;
    for (std::size_t i = rank; i-- > 0;) {
      Complex acc = 0.0;
      for (std::size_t j = i + 1; j < 3; ++j) acc += e.u[i][j] * y[j];
      y[i] = -acc / e.u[i][i];
    }
    ComplexVector3 x{};
    for (std::size_t i = 0; i < 3; ++i) x[e.col[i]] = y[i];
    out.push_back(x);
  }
  return out;
}

ComplexVector3 normalize(ComplexVector3 v) {
  double largest = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > largest) {
      largest = std::abs(v[i]);
      arg = i;
    }
  }
  const std::size_t anchor = std::abs(v[2]) > 1e-12 * largest ? 2 : arg;
  const Complex scale = v[anchor];
  for (auto& x : v) x /= scale;
  v[anchor] = 1.0;
  return v;
}

ComplexVector3 conj(const ComplexVector3& v) {
  return {std::conj(v[0]), std::conj(v[1]), std::conj(v[2])};
}

double inf_norm(const ComplexMatrix3& m) {
  double best = 0.0;
  for (const auto& row : m) {
    best = std::max(best, std::abs(row[0]) + std::abs(row[1]) + std::abs(row[2]));
  }
  return best;
}

}  // namespace

Matrix3 Matrix3::identity() { return diagonal(1.0, 1.0, 1.0); }

Matrix3 Matrix3::diagonal(double a, double b, double c) {
  Matrix3 m;
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

Matrix3 Matrix3::from_rows(const Vector3& r0, const Vector3& r1, const Vector3& r2) {
  return Matrix3{{r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], r2[0], r2[1], r2[2]}};
}

double Matrix3::trace() const { return entries[0] + entries[4] + entries[8]; }

double Matrix3::determinant() const {
  const auto& m = *this;
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

double Matrix3::frobenius_norm() const {
  double acc = 0.0;
  for (double x : entries) acc += x * x;
  return std::sqrt(acc);
}

double Matrix3::max_abs() const {
  double best = 0.0;
  for (double x : entries) best = std::max(best, std::abs(x));
  return best;
}

bool Matrix3::all_finite() const {
  return std::all_of(entries.begin(), entries.end(), [](double x) { return std::isfinite(x); });
}

Vector3 Matrix3::operator*(const Vector3& x) const {
  Vector3 out{};
  for (std::size_t r = 0; r < 3; ++r) {
    out[r] = (*this)(r, 0) * x[0] + (*this)(r, 1) * x[1] + (*this)(r, 2) * x[2];
  }
  return out;
}

ComplexVector3 Matrix3::operator*(const ComplexVector3& x) const {
  ComplexVector3 out{};
  for (std::size_t r = 0; r < 3; ++r) {
    out[r] = (*this)(r, 0) * x[0] + (*this)(r, 1) * x[1] + (*this)(r, 2) * x[2];
  }
  return out;
}

Matrix3 round_entries(const Matrix3& m, int decimals) {
  const double scale = std::pow(10.0, decimals);
  Matrix3 out = m;
  for (double& x : out.entries) x = std::round(x * scale) / scale;
  return out;
}

std::string_view to_string(EquilibriumKind kind) {
  return kind == EquilibriumKind::Uninfected ? "uninfected" : "infected";
}

std::vector<Equilibrium> equilibria(const ModelParams& params, Efficacy efficacy,
                                    ModelKind kind) {
  params.validate();
  const EffectiveRates rates = effective_rates(kind, params, efficacy);

  std::vector<Equilibrium> out;
  out.push_back({{params.s / params.d, 0.0, 0.0}, EquilibriumKind::Uninfected});

  if (rates.beta * rates.k > 0.0) {
    const double t = params.m1 * params.m2 / (rates.k * rates.beta);
    const double t_star = params.s / params.m2 - params.d * params.m1 / (rates.beta * rates.k);
    const double v = rates.k * params.s / (params.m1 * params.m2) - params.d / rates.beta;
    if (t_star > 0.0 && v > 0.0) out.push_back({{t, t_star, v}, EquilibriumKind::Infected});
  }
  return out;
}

Matrix3 jacobian(const ModelParams& params, Efficacy efficacy, ModelKind kind,
                 const SystemState& point) {
  params.validate();
  const EffectiveRates r = effective_rates(kind, params, efficacy);
  return Matrix3::from_rows({-params.d - r.beta * point.V, 0.0, -r.beta * point.T},
                            {r.beta * point.V, -params.m2, r.beta * point.T},
                            {0.0, r.k, -params.m1});
}

std::array<Complex, 3> cubic_roots(double c2, double c1, double c0) {
  std::array<Complex, 3> roots{};
  std::size_t n = 0;
  for (const auto& g : cubic_root_groups(c2, c1, c0)) {
    for (int i = 0; i < g.multiplicity; ++i) roots[n++] = g.value;
  }
  std::sort(roots.begin(), roots.end(), eigen_order);
  return roots;
}

EigenDecomposition eigen3(const Matrix3& a) {
  if (!a.all_finite()) throw DomainError("eigen3: matrix has non-finite entries");

  EigenDecomposition out;
  const double scale = a.max_abs();
  if (scale == 0.0) {
    for (std::size_t i = 0; i < 3; ++i) {
      out.values[i] = 0.0;
      out.vectors[i] = {};
      out.vectors[i][i] = 1.0;
    }
    return out;
  }

  Matrix3 b = a;
  for (double& x : b.entries) x /= scale;
  const double minors = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0) + b(0, 0) * b(2, 2) -
                        b(0, 2) * b(2, 0) + b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1);
  const auto groups = cubic_root_groups(-b.trace(), minors, -b.determinant());

  struct Pair {
    Complex value;
    ComplexVector3 vector;
  };
  std::vector<Pair> pairs;

  auto shifted = [&b](Complex lambda) {
    ComplexMatrix3 m{};
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) m[r][c] = b(r, c);
      m[r][r] -= lambda;
    }
    return m;
  };

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const RootGroup& g = groups[gi];
    // The lower member of a conjugate pair reuses the upper member's vector.
    if (g.value.imag() < 0.0) continue;

    const ComplexMatrix3 m = shifted(g.value);
    const Elimination e = eliminate(m);
    const auto mult = static_cast<std::size_t>(g.multiplicity);
    const std::size_t rank = 3 - mult;

    if (mult > 1) {
      const double tol = kRankTol * std::max(1.0, e.pivot[0]);
      std::size_t numeric_rank = 0;
      for (double pv : e.pivot) numeric_rank += pv > tol ? 1 : 0;
      if (numeric_rank > rank) {
        std::ostringstream os;
        os << "eigen3: eigenvalue " << g.value.real() * scale << " has algebraic multiplicity "
           << mult << " but geometric multiplicity " << 3 - numeric_rank
           << "; the matrix is defective";
        throw DefectiveMatrixError(os.str());
      }
    }

    for (const auto& v : null_vectors(e, rank)) {
      const ComplexVector3 nv = normalize(v);
      pairs.push_back({g.value * scale, nv});
      if (g.value.imag() > 0.0) pairs.push_back({std::conj(g.value) * scale, conj(nv)});
    }
  }

  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& x, const Pair& y) { return eigen_order(x.value, y.value); });
  for (std::size_t i = 0; i < 3; ++i) {
    out.values[i] = pairs[i].value;
    out.vectors[i] = pairs[i].vector;
  }
  return out;
}

std::string_view to_string(Stability stability) {
  switch (stability) {
    case Stability::AsymptoticallyStable: return "AsymptoticallyStable";
    case Stability::Unstable: return "Unstable";
    case Stability::NonHyperbolic: return "NonHyperbolic";
  }
  return "unknown";
}

StabilityReport classify(std::span<const Complex> eigenvalues, double tolerance) {
  StabilityReport report;
  report.spectral_abscissa = -std::numeric_limits<double>::infinity();
  bool all_negative = true;
  bool any_positive = false;
  bool hyperbolic = true;
  for (const Complex& l : eigenvalues) {
    const double re = l.real();
    report.spectral_abscissa = std::max(report.spectral_abscissa, re);
    all_negative = all_negative && re < -tolerance;
    any_positive = any_positive || re > tolerance;
    hyperbolic = hyperbolic && std::abs(re) > tolerance;
  }
  report.hyperbolic = hyperbolic;
  if (all_negative) {
    report.classification = Stability::AsymptoticallyStable;
  } else if (any_positive) {
    report.classification = Stability::Unstable;
  } else {
    report.classification = Stability::NonHyperbolic;
  }
  return report;
}

StabilityReport classify(const EigenDecomposition& eig, double tolerance) {
  return classify(std::span<const Complex>(eig.values), tolerance);
}

LinearizedSolution fit_linearized(const EigenDecomposition& eig, const Vector3& x0) {
  // Columns of v are the eigenvectors.
  ComplexMatrix3 v{};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) v[r][c] = eig.vectors[c][r];
  }

  const Complex det = v[0][0] * (v[1][1] * v[2][2] - v[1][2] * v[2][1]) -
                      v[0][1] * (v[1][0] * v[2][2] - v[1][2] * v[2][0]) +
                      v[0][2] * (v[1][0] * v[2][1] - v[1][1] * v[2][0]);
  if (det == 0.0 || !std::isfinite(std::abs(det))) {
    throw ConditioningError(std::numeric_limits<double>::infinity(), kMaxEigenbasisCondition);
  }

  ComplexMatrix3 inv{};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      // inv[r][c] = cofactor(c, r) / det
      const std::size_t r0 = (c + 1) % 3, r1 = (c + 2) % 3;
      const std::size_t c0 = (r + 1) % 3, c1 = (r + 2) % 3;
      inv[r][c] = (v[r0][c0] * v[r1][c1] - v[r0][c1] * v[r1][c0]) / det;
    }
  }

  const double cond = inf_norm(v) * inf_norm(inv);
  if (!(cond < kMaxEigenbasisCondition)) throw ConditioningError(cond, kMaxEigenbasisCondition);

  LinearizedSolution sol;
  for (std::size_t i = 0; i < 3; ++i) {
    Complex c = 0.0;
    for (std::size_t j = 0; j < 3; ++j) c += inv[i][j] * x0[j];
    sol.modes[i] = {eig.values[i], eig.vectors[i], c};
  }
  return sol;
}

ComplexVector3 LinearizedSolution::evaluate_complex(double t) const {
  ComplexVector3 out{};
  for (const auto& mode : modes) {
    const Complex weight = mode.coefficient * std::exp(mode.lambda * t);
    for (std::size_t r = 0; r < 3; ++r) out[r] += weight * mode.vector[r];
  }
  return out;
}

Vector3 evaluate_linearized(const LinearizedSolution& solution, double t) {
  const ComplexVector3 z = solution.evaluate_complex(t);
  return {z[0].real(), z[1].real(), z[2].real()};
}

}  // namespace viradyn
