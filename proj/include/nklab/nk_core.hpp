#ifndef NKLAB_NK_CORE_HPP
#define NKLAB_NK_CORE_HPP

// The almost-Hermitian structure on the product of two unimodular 2x2 groups:
// the scaled homogeneous metric g of signature (4,2), the almost complex
// structure J, the product structures P and Q, the Levi-Civita connection of
// g on left-invariant fields (as a cached bilinear table), the tensor
// G = (covariant derivative of J), and the ambient curvature with its closed
// form. Tangent data lives in left Lie-algebra coordinates (alpha, beta),
// which makes every identity here base-point free; the flat 8-dimensional
// matrix-space picture appears only in verify_euclidean_embedding.

#include <Eigen/Dense>
#include <array>

#include "nklab/rng.hpp"
#include "nklab/split_mat.hpp"

namespace nklab {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// Base-point-free element of the double traceless algebra; also the
// left-invariant-field coordinate of a tangent vector.
struct AlgebraVec {
  Sl2Vec alpha, beta;

  AlgebraVec() = default;
  AlgebraVec(const Sl2Vec& a, const Sl2Vec& b) : alpha(a), beta(b) {}

  AlgebraVec operator+(const AlgebraVec& o) const {
    return {alpha + o.alpha, beta + o.beta};
  }
  AlgebraVec operator-(const AlgebraVec& o) const {
    return {alpha - o.alpha, beta - o.beta};
  }
  AlgebraVec operator-() const { return {-alpha, -beta}; }
  friend AlgebraVec operator*(double s, const AlgebraVec& v) {
    return {s * v.alpha, s * v.beta};
  }
};

// A point of the product group: pair of unimodular matrices. The determinant
// check is relative to the squared matrix scale, since the absolute rounding
// error of a determinant grows with the square of the entries.
struct Point {
  Mat2 a, b;

  Point() : a(Mat2::identity()), b(Mat2::identity()) {}
  Point(const Mat2& pa, const Mat2& pb, double tol = default_tol().det_tol)
      : a(pa), b(pb) {
    check_unimodular(pa, tol);
    check_unimodular(pb, tol);
  }

 private:
  static void check_unimodular(const Mat2& m, double tol) {
    double scale = std::max(1.0, frobenius(m) * frobenius(m));
    if (std::abs(m.det() - 1.0) > tol * scale) {
      throw InvalidInput("Point: determinant " + std::to_string(m.det()) +
                         " is not 1 within tolerance");
    }
  }
};

// Tangent vector (a*alpha, b*beta) attached to a base point.
struct TangentVec {
  Point base;
  Sl2Vec alpha, beta;

  AlgebraVec algebra() const { return {alpha, beta}; }
};

// Coordinates in the ordered basis
//   {(i,0), (j,0), (k,0), (0,i), (0,j), (0,k)}.
Vec6 to_coords(const AlgebraVec& x);
AlgebraVec from_coords(const Vec6& v);
AlgebraVec basis_vec(int idx);  // idx in [0,6)

// Euclidean norm of the coordinate vector; used for residuals (the metric g
// is indefinite, so its quadratic form cannot measure smallness).
double coord_norm(const AlgebraVec& x);

// ---------------------------------------------------------------------------
// Structure tables
// ---------------------------------------------------------------------------

struct StructureConstants {
  Mat6 gram_g;     // g on the basis above
  Mat6 gram_prod;  // the product (split) metric on the same basis
  Mat6 j_mat, p_mat, q_mat;
  // koszul[i][j] = connection of the i-th basis field applied to the j-th,
  // in basis coordinates.
  std::array<std::array<Vec6, 6>, 6> koszul;

  // Immutable singleton, computed once; throws SingularGram if the metric
  // table fails to invert (which would mean corrupted constants).
  static const StructureConstants& get();
};

// ---------------------------------------------------------------------------
// Metrics and structure tensors (all exact-precision algebra)
// ---------------------------------------------------------------------------

double metric_g(const AlgebraVec& x, const AlgebraVec& y);
double metric_product(const AlgebraVec& x, const AlgebraVec& y);
AlgebraVec apply_J(const AlgebraVec& x);
AlgebraVec apply_P(const AlgebraVec& x);
AlgebraVec apply_Q(const AlgebraVec& x);

// Lie bracket of the left-invariant extensions: ([alpha, alpha'], [beta,
// beta']) = (2 alpha x alpha', 2 beta x beta').
AlgebraVec bracket(const AlgebraVec& x, const AlgebraVec& y);

// Levi-Civita connection of g on left-invariant fields: the bilinear map L
// with 2 g(L(A,B), C) = g([A,B],C) - g([A,C],B) - g([B,C],A) for all C.
AlgebraVec koszul_connection(const AlgebraVec& a, const AlgebraVec& b);

// G(X, Y) = L(X, JY) - J L(X, Y), the covariant derivative of J.
AlgebraVec tensor_G(const AlgebraVec& x, const AlgebraVec& y);

// Ambient curvature via the connection: L(X, L(Y,Z)) - L(Y, L(X,Z)) -
// L([X,Y], Z).
AlgebraVec curvature(const AlgebraVec& x, const AlgebraVec& y,
                     const AlgebraVec& z);

// The same tensor through its closed-form expression in g, J, P.
AlgebraVec curvature_closed_form(const AlgebraVec& u, const AlgebraVec& v,
                                 const AlgebraVec& w);

// K = g(R(U,V)V, U) / (g(U,U) g(V,V) - g(U,V)^2); throws DegeneratePlane
// when the denominator is below the plane tolerance.
double sectional_curvature(const AlgebraVec& u, const AlgebraVec& v,
                           double plane_tol = default_tol().plane_tol);

// Residual of the covariant-derivative identity for the product structure,
// optionally for the rotated structure cos(eta) P + sin(eta) J P:
//   L(X, PY) - P L(X,Y) - 1/2 (J G(X, PY) + J P G(X, Y)).
double verify_nabla_P(const AlgebraVec& x, const AlgebraVec& y,
                      double eta = 0.0);

// ---------------------------------------------------------------------------
// Flat-space consistency check
// ---------------------------------------------------------------------------

struct EmbeddingReport {
  // Full flat-derivative identity: tangent + normal terms reproduce the
  // central-difference derivative of a left-invariant field.
  double max_resid_flat = 0.0;
  // Tangential part alone against the product-metric connection expressed
  // through the nearly Kaehler one.
  double max_resid_tangent = 0.0;
  int samples = 0;
  double fd_step = 0.0;
};

// Differentiates left-invariant fields in the flat 8-dimensional matrix
// coordinates by second-order central differences and checks the two
// connection identities relating the flat derivative to the structure
// tensors. Residuals are truncation-limited: ~ step^2.
EmbeddingReport verify_euclidean_embedding(RngStream& rng, int samples,
                                           double fd_step = default_tol()
                                               .fd_step);

}  // namespace nklab

#endif
