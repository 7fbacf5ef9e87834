#ifndef NETSCAT_NUMERICS_HPP
#define NETSCAT_NUMERICS_HPP

// Dense linear-algebra primitives shared by every other module. All routines
// are templated on the scalar type and accept arbitrary Eigen expressions.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "netscat/errors.hpp"

namespace netscat {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;
using RealVector = Vector<double>;
using ComplexVector = Vector<Complex>;

// Fixed numerical thresholds. Defaults sit at ~100x machine epsilon for the
// matrix sizes used here (dim <= 64).
struct Tolerances {
  double singular_pivot = 1e-13;  // relative to max |A_ij|
  double symmetry = 1e-12;        // relative to max(1, max |A_ij|)
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

// Eigen-decomposition with eigenvalues sorted by real part, then imaginary
// part. Eigenvector columns are unit-norm and aligned with eigenvalues.
template <typename Scalar>
struct Spectrum {
  Vector<Scalar> eigenvalues;
  Matrix<Scalar> eigenvectors;

  Index size() const { return eigenvalues.size(); }
};

namespace detail {

template <typename Scalar>
bool spectral_less(const Scalar& a, const Scalar& b) {
  if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  } else {
    return a < b;
  }
}

template <typename Scalar>
Spectrum<Scalar> sorted_spectrum(const Vector<Scalar>& values,
                                 const Matrix<Scalar>& vectors) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    return spectral_less(values(i), values(j));
  });
  Spectrum<Scalar> out;
  out.eigenvalues.resize(values.size());
  out.eigenvectors.resize(vectors.rows(), vectors.cols());
  for (Index k = 0; k < values.size(); ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = values(src);
    out.eigenvectors.col(k) = vectors.col(src).normalized();
  }
  return out;
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionMismatch(std::string(what) + ": matrix must be square and non-empty, got " +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

}  // namespace detail

template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real max_abs(
    const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0;
  return a.cwiseAbs().maxCoeff();
}

// Solves A X = B by LU with partial pivoting. Throws SingularMatrix when a
// pivot falls below tol.singular_pivot * max|A_ij|.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> solve_linear(const Eigen::MatrixBase<DerivedA>& a,
                                               const Eigen::MatrixBase<DerivedB>& b,
                                               const Tolerances& tol = default_tolerances()) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_square(a, "solve_linear");
  if (b.rows() != a.rows()) {
    throw DimensionMismatch("solve_linear: right-hand side has " + std::to_string(b.rows()) +
                            " rows, expected " + std::to_string(a.rows()));
  }
  const Matrix<Scalar> dense = a;
  const auto scale = max_abs(dense);
  const Eigen::PartialPivLU<Matrix<Scalar>> lu(dense);
  const auto min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(scale > 0) || !(min_pivot > tol.singular_pivot * scale)) {
    throw SingularMatrix("solve_linear: pivot " + std::to_string(min_pivot) +
                         " below tolerance at matrix scale " + std::to_string(scale));
  }
  return lu.solve(b.template cast<Scalar>());
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a,
                  const Tolerances& tol = default_tolerances()) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max<double>(1.0, max_abs(a));
  return max_abs(a - a.transpose()) <= tol.symmetry * scale;
}

// Real symmetric eigenproblem; eigenvalues ascending, eigenvectors orthonormal.
template <typename Derived>
Spectrum<typename Derived::Scalar> eig_sym(const Eigen::MatrixBase<Derived>& a,
                                           const Tolerances& tol = default_tolerances()) {
  using Scalar = typename Derived::Scalar;
  static_assert(!Eigen::NumTraits<Scalar>::IsComplex, "eig_sym expects a real matrix");
  detail::require_square(a, "eig_sym");
  if (!is_symmetric(a, tol)) throw InvalidParameter("eig_sym: matrix is not symmetric");
  const Matrix<Scalar> dense = a;
  const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(dense);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("eig_sym: QR iteration did not converge");
  }
  return detail::sorted_spectrum<Scalar>(solver.eigenvalues(), solver.eigenvectors());
}

// General complex eigenproblem (used for the non-Hermitian effective
// Hamiltonian). Real input is promoted to complex.
template <typename Derived>
Spectrum<std::complex<typename Eigen::NumTraits<typename Derived::Scalar>::Real>> eig_complex(
    const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  using Scalar = std::complex<Real>;
  detail::require_square(a, "eig_complex");
  const Matrix<Scalar> dense = a.template cast<Scalar>();
  const Eigen::ComplexEigenSolver<Matrix<Scalar>> solver(dense, true);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("eig_complex: Schur iteration did not converge");
  }
  return detail::sorted_spectrum<Scalar>(solver.eigenvalues(), solver.eigenvectors());
}

}  // namespace netscat

#endif  // NETSCAT_NUMERICS_HPP
