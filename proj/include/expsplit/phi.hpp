#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <type_traits>

namespace expsplit {

namespace detail {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace detail

/// phi_0 = exp, phi_{k+1}(z) = (phi_k(z) - 1/k!)/z, entire functions.
/// Below |z| < 1 a 20-term Taylor series avoids the cancellation at the
/// removable singularity; elsewhere the recurrence on top of exp/expm1.
template <typename Scalar>
Scalar phi(int k, Scalar z) {
  if (k < 0 || k > 4) throw std::invalid_argument("phi: order must be in 0..4");
  if (k == 0) {
    using std::exp;
    return exp(z);
  }
  if (std::abs(z) < 1.0) {
    // phi_k(z) = sum_{j>=0} z^j / (j+k)!
    Scalar sum = Scalar(1.0 / detail::factorial(k));
    Scalar term = Scalar(1);
    double fact = detail::factorial(k);
    for (int j = 1; j < 20; ++j) {
      term *= z;
      fact *= (j + k);
      sum += term / Scalar(fact);
    }
    return sum;
  }
  Scalar p;
  if constexpr (detail::is_complex<Scalar>::value) {
    p = (std::exp(z) - Scalar(1)) / z;
  } else {
    p = std::expm1(z) / z;
  }
  for (int j = 2; j <= k; ++j) {
    p = (p - Scalar(1.0 / detail::factorial(j - 1))) / z;
  }
  return p;
}

/// Scratch space for the dense Pade kernels; one per caller, never shared.
template <typename Scalar>
struct DensePhiWorkspace {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::Index dimension = 0;
  Matrix m2, m4, m6, u, v;

  void resize(Eigen::Index n) {
    if (dimension == n) return;
    dimension = n;
    m2.resize(n, n);
    m4.resize(n, n);
    m6.resize(n, n);
    u.resize(n, n);
    v.resize(n, n);
  }
};

/// Matrix exponential by scaling and squaring with the degree-13 diagonal
/// Pade approximant; the argument is scaled so its 1-norm is at most 5.37.
template <typename Derived>
typename Derived::PlainObject expm_dense(
    const Eigen::MatrixBase<Derived>& m_in,
    DensePhiWorkspace<typename Derived::Scalar>* ws = nullptr) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m_in.rows() != m_in.cols())
    throw std::invalid_argument("expm_dense: matrix must be square");
  const Eigen::Index n = m_in.rows();

  DensePhiWorkspace<Scalar> local;
  DensePhiWorkspace<Scalar>& w = ws ? *ws : local;
  w.resize(n);

  // Higham's degree-13 coefficients.
  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};
  const double theta13 = 5.371920351148152;

  Matrix a = m_in;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) {
    s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    a *= Scalar(std::ldexp(1.0, -s));
  }

  w.m2.noalias() = a * a;
  w.m4.noalias() = w.m2 * w.m2;
  w.m6.noalias() = w.m2 * w.m4;
  Matrix tmp = Scalar(b[13]) * w.m6 + Scalar(b[11]) * w.m4 + Scalar(b[9]) * w.m2;
  w.u.noalias() = w.m6 * tmp;
  w.u += Scalar(b[7]) * w.m6 + Scalar(b[5]) * w.m4 + Scalar(b[3]) * w.m2;
  w.u.diagonal().array() += Scalar(b[1]);
  tmp.noalias() = a * w.u;
  w.u = tmp;
  tmp = Scalar(b[12]) * w.m6 + Scalar(b[10]) * w.m4 + Scalar(b[8]) * w.m2;
  w.v.noalias() = w.m6 * tmp;
  w.v += Scalar(b[6]) * w.m6 + Scalar(b[4]) * w.m4 + Scalar(b[2]) * w.m2;
  w.v.diagonal().array() += Scalar(b[0]);

  Matrix num = w.v + w.u;
  Matrix den = w.v - w.u;
  Matrix e = den.partialPivLu().solve(num);
  for (int i = 0; i < s; ++i) {
    tmp.noalias() = e * e;
    e.swap(tmp);
  }
  return e;
}

/// phi_k(M), k in {1,2}, as the top-right block of the exponential of the
/// block-augmented matrix [[M, I, 0], [0, 0, I], [0, 0, 0]].
template <typename Derived>
typename Derived::PlainObject phim_dense(int k,
                                         const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (k != 1 && k != 2) throw std::invalid_argument("phim_dense: k must be 1 or 2");
  if (m.rows() != m.cols())
    throw std::invalid_argument("phim_dense: matrix must be square");
  const Eigen::Index n = m.rows();
  Matrix aug = Matrix::Zero(n * (k + 1), n * (k + 1));
  aug.topLeftCorner(n, n) = m;
  for (int j = 0; j < k; ++j)
    aug.block(j * n, (j + 1) * n, n, n).setIdentity();
  Matrix e = expm_dense(aug);
  return e.topRightCorner(n, n);
}

}  // namespace expsplit
