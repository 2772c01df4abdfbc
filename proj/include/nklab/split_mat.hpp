#ifndef NKLAB_SPLIT_MAT_HPP
#define NKLAB_SPLIT_MAT_HPP

// Real 2x2 matrix algebra with the split (signature (2,1)) inner product on
// traceless matrices, the commutator cross product, and the closed-form
// exponential. Everything here is templated on the scalar so the same code
// path runs on double and on std::complex<double>; the complex instantiation
// is what powers the high-accuracy complex-step differentiation used
// internally by the differential-geometry layers.

#include <array>
#include <cmath>
#include <complex>
#include <ostream>

#include "nklab/errors.hpp"
#include "nklab/rng.hpp"
#include "nklab/tolerances.hpp"

namespace nklab {

// ---------------------------------------------------------------------------
// Mat2T: a plain 2x2 matrix over scalar T.
// ---------------------------------------------------------------------------

template <class T>
struct Mat2T {
  T m00{}, m01{}, m10{}, m11{};

  static Mat2T identity() { return {T(1), T(0), T(0), T(1)}; }
  static Mat2T zero() { return {}; }

  T trace() const { return m00 + m11; }
  T det() const { return m00 * m11 - m01 * m10; }
  Mat2T adjugate() const { return {m11, -m01, -m10, m00}; }
  Mat2T transpose() const { return {m00, m10, m01, m11}; }

  // Inverse via the adjugate; caller is responsible for non-singularity.
  Mat2T inverse() const {
    T d = det();
    return {m11 / d, -m01 / d, -m10 / d, m00 / d};
  }

  Mat2T& operator+=(const Mat2T& o) {
    m00 += o.m00; m01 += o.m01; m10 += o.m10; m11 += o.m11;
    return *this;
  }
  Mat2T& operator-=(const Mat2T& o) {
    m00 -= o.m00; m01 -= o.m01; m10 -= o.m10; m11 -= o.m11;
    return *this;
  }
  Mat2T& operator*=(const T& s) {
    m00 *= s; m01 *= s; m10 *= s; m11 *= s;
    return *this;
  }
};

template <class T>
Mat2T<T> operator+(Mat2T<T> a, const Mat2T<T>& b) { return a += b; }

template <class T>
Mat2T<T> operator-(Mat2T<T> a, const Mat2T<T>& b) { return a -= b; }

template <class T>
Mat2T<T> operator-(const Mat2T<T>& a) {
  return {-a.m00, -a.m01, -a.m10, -a.m11};
}

template <class T>
Mat2T<T> operator*(const Mat2T<T>& a, const Mat2T<T>& b) {
  return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
          a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

template <class T>
Mat2T<T> operator*(const T& s, Mat2T<T> a) { return a *= s; }

template <class T>
Mat2T<T> operator*(Mat2T<T> a, const T& s) { return a *= s; }

// Mixed real-scalar * complex-matrix convenience.
inline Mat2T<std::complex<double>> operator*(double s,
                                             Mat2T<std::complex<double>> a) {
  return a *= std::complex<double>(s);
}

using Mat2 = Mat2T<double>;
using CMat2 = Mat2T<std::complex<double>>;

inline CMat2 complexify(const Mat2& a) {
  return {a.m00, a.m01, a.m10, a.m11};
}

inline Mat2 real_part(const CMat2& a) {
  return {a.m00.real(), a.m01.real(), a.m10.real(), a.m11.real()};
}

inline Mat2 imag_part(const CMat2& a) {
  return {a.m00.imag(), a.m01.imag(), a.m10.imag(), a.m11.imag()};
}

inline double frobenius(const Mat2& a) {
  return std::sqrt(a.m00 * a.m00 + a.m01 * a.m01 + a.m10 * a.m10 +
                   a.m11 * a.m11);
}

inline double max_abs(const Mat2& a) {
  return std::max(std::max(std::abs(a.m00), std::abs(a.m01)),
                  std::max(std::abs(a.m10), std::abs(a.m11)));
}

inline std::ostream& operator<<(std::ostream& os, const Mat2& a) {
  return os << "[[" << a.m00 << ", " << a.m01 << "], [" << a.m10 << ", "
            << a.m11 << "]]";
}

// ---------------------------------------------------------------------------
// Distinguished traceless basis. i*i = Id, j*j = Id, k*k = -Id, and the three
// anticommute; together with the inner product below, i and j are spacelike
// and k is timelike.
// ---------------------------------------------------------------------------

inline Mat2 basis_i() { return {1.0, 0.0, 0.0, -1.0}; }
inline Mat2 basis_j() { return {0.0, 1.0, 1.0, 0.0}; }
inline Mat2 basis_k() { return {0.0, 1.0, -1.0, 0.0}; }

// ---------------------------------------------------------------------------
// Inner product and cross product.
// ---------------------------------------------------------------------------

// <a, b> = -1/2 tr(adj(a) b). On traceless matrices this equals
// 1/2 tr(a b), has signature (2,1), and satisfies a*a = <a,a> Id.
template <class T>
T minkowski_inner(const Mat2T<T>& a, const Mat2T<T>& b) {
  Mat2T<T> p = a.adjugate() * b;
  return T(-0.5) * p.trace();
}

// a x b = 1/2 (ab - ba). Traceless when a, b are (exactly, in floating
// point: the two diagonal entries are the same products with opposite sign).
template <class T>
Mat2T<T> cross(const Mat2T<T>& a, const Mat2T<T>& b) {
  Mat2T<T> c = a * b - b * a;
  return T(0.5) * c;
}

// ---------------------------------------------------------------------------
// Sl2Vec: a validated traceless 2x2 real matrix.
// ---------------------------------------------------------------------------

class Sl2Vec {
 public:
  Sl2Vec() = default;

  // Validates |trace| <= tol, then symmetrises the diagonal so the stored
  // matrix is exactly traceless.
  explicit Sl2Vec(const Mat2& a, double tol = default_tol().trace_tol) {
    if (std::abs(a.trace()) > tol) {
      throw InvalidInput("Sl2Vec: matrix trace " + std::to_string(a.trace()) +
                         " exceeds tolerance " + std::to_string(tol));
    }
    double x = 0.5 * (a.m00 - a.m11);
    m_ = {x, a.m01, a.m10, -x};
  }

  // Coordinates in the (i, j, k) basis: x*i + y*j + z*k.
  static Sl2Vec from_xyz(double x, double y, double z) {
    Sl2Vec v;
    v.m_ = {x, y + z, y - z, -x};
    return v;
  }

  // For internal construction of results that are traceless by construction.
  static Sl2Vec unchecked(const Mat2& a) {
    Sl2Vec v;
    double x = 0.5 * (a.m00 - a.m11);
    v.m_ = {x, a.m01, a.m10, -x};
    return v;
  }

  const Mat2& mat() const { return m_; }

  // (x, y, z) with a = x*i + y*j + z*k.
  std::array<double, 3> xyz() const {
    return {m_.m00, 0.5 * (m_.m01 + m_.m10), 0.5 * (m_.m01 - m_.m10)};
  }

  Sl2Vec operator+(const Sl2Vec& o) const { return unchecked(m_ + o.m_); }
  Sl2Vec operator-(const Sl2Vec& o) const { return unchecked(m_ - o.m_); }
  Sl2Vec operator-() const { return unchecked(-m_); }
  friend Sl2Vec operator*(double s, const Sl2Vec& v) {
    return unchecked(s * v.m_);
  }

 private:
  Mat2 m_{};
};

inline double minkowski_inner(const Sl2Vec& a, const Sl2Vec& b) {
  return minkowski_inner(a.mat(), b.mat());
}

inline Sl2Vec cross(const Sl2Vec& a, const Sl2Vec& b) {
  return Sl2Vec::unchecked(cross(a.mat(), b.mat()));
}

// ---------------------------------------------------------------------------
// Exponential of a traceless matrix, in closed form. With m = <a,a> (so that
// a*a = m Id),
//   exp(a) = cosh(sqrt(m)) Id + sinh(sqrt(m))/sqrt(m) * a,
// where both coefficient functions are entire in m (they are even in
// sqrt(m)), so the same expressions cover m > 0, m < 0 via cos/sin, and a
// power series near m = 0.
// ---------------------------------------------------------------------------

namespace detail {

inline double cosh_sqrt(double m) {
  if (m > 1e-14) return std::cosh(std::sqrt(m));
  if (m < -1e-14) return std::cos(std::sqrt(-m));
  return 1.0 + m / 2.0 + m * m / 24.0 + m * m * m / 720.0;
}

inline double sinhc_sqrt(double m) {
  if (m > 1e-14) {
    double w = std::sqrt(m);
    return std::sinh(w) / w;
  }
  if (m < -1e-14) {
    double w = std::sqrt(-m);
    return std::sin(w) / w;
  }
  return 1.0 + m / 6.0 + m * m / 120.0 + m * m * m / 5040.0;
}

inline std::complex<double> cosh_sqrt(std::complex<double> m) {
  if (std::abs(m) <= 1e-14) {
    return 1.0 + m / 2.0 + m * m / 24.0 + m * m * m / 720.0;
  }
  return std::cosh(std::sqrt(m));  // even in the sqrt branch choice
}

inline std::complex<double> sinhc_sqrt(std::complex<double> m) {
  if (std::abs(m) <= 1e-14) {
    return 1.0 + m / 6.0 + m * m / 120.0 + m * m * m / 5040.0;
  }
  std::complex<double> w = std::sqrt(m);
  return std::sinh(w) / w;
}

}  // namespace detail

// Exponential of a (numerically) traceless matrix; no trace validation here,
// callers pass Sl2Vec-backed or by-construction traceless data.
template <class T>
Mat2T<T> exp_traceless(const Mat2T<T>& a) {
  T m = -a.det();  // equals <a,a> for traceless a
  Mat2T<T> r = detail::sinhc_sqrt(m) * a;
  T e = detail::cosh_sqrt(m);
  r.m00 += e;
  r.m11 += e;
  return r;
}

inline Mat2 exp_sl2(const Sl2Vec& a) { return exp_traceless(a.mat()); }

// ---------------------------------------------------------------------------
// Conjugation solving and random sampling.
// ---------------------------------------------------------------------------

using BasisTriple = std::array<Sl2Vec, 3>;

struct ConjugationResult {
  Mat2 c;        // |det c| = 1, sign-normalised (first entry with
                 // magnitude > 1e-9, scanning row-major, is positive)
  int det_sign;  // +1 or -1
};

// Finds c with b_i = c a_i c^{-1} for i = 0,1,2, scaled to |det c| = 1.
// Throws GramMismatch if the pairwise inner products of the two triples
// disagree beyond gram_tol, NoSolution if the intertwining system does not
// have a one-dimensional kernel or the kernel element is singular.
ConjugationResult solve_conjugation(const BasisTriple& a, const BasisTriple& b,
                                    double gram_tol = default_tol().gram_tol);

// Random traceless matrix: entries m00, m01, m10 drawn uniformly from
// [-1, 1] in that order (m11 = -m00).
Sl2Vec random_traceless(RngStream& rng);

// Random unimodular matrix: exp of random_traceless(rng).
Mat2 random_sl2(RngStream& rng);

}  // namespace nklab

#endif
