#ifndef NKLAB_ISOMETRY_HPP
#define NKLAB_ISOMETRY_HPP

// The full structure-preserving isometry group of the product geometry:
// (SL(2,R) x SL(2,R) x SL(2,R)) semidirect (Z2 x S3). An element
// (a, b, c, k, perm) acts as the six-fold permutation isometry composed with
// (p, q) -> (i^k a p (i^k c)^-1, i^k b q (i^k c)^-1), where i is the
// diagonal split generator (determinant -1), giving the Z2 factor.
//
// The six permutation isometries Psi_{kappa,tau} descend from permuting the
// three slots of the triple-group presentation; kappa is the permutation
// parity, and tau in {0, 2pi/3, 4pi/3} is the angle in the P-equivariance
// law P dPsi = dPsi (cos(tau) P + sin(tau) J P). The J-law carries the sign
// (-1)^kappa.

#include <array>
#include <utility>

#include "nklab/nk_core.hpp"

namespace nklab {

// One of the six permutation isometries, indexed by (kappa, tau_idx) with
// tau = tau_idx * 2pi/3. Point actions:
//   (0,0): (p,q)            (1,0): (q,p)
//   (0,1): (q^-1, p q^-1)   (1,1): (p q^-1, q^-1)
//   (0,2): (q p^-1, p^-1)   (1,2): (p^-1, q p^-1)
struct Perm {
  int kappa = 0;    // 0 or 1
  int tau_idx = 0;  // 0, 1, 2

  double tau() const { return tau_idx * 2.0 * M_PI / 3.0; }
  int index() const { return 3 * kappa + tau_idx; }  // 0..5
  bool operator==(const Perm&) const = default;
};

inline const std::array<Perm, 6>& all_perms() {
  static const std::array<Perm, 6> ps = {
      Perm{0, 0}, Perm{0, 1}, Perm{0, 2},
      Perm{1, 0}, Perm{1, 1}, Perm{1, 2}};
  return ps;
}

// Slot shuffle of the triple-group presentation realising this permutation
// isometry: output slot i takes input slot shuffle[i].
std::array<int, 3> perm_shuffle(const Perm& p);

// Exact S3 composition: the permutation with shuffle s.t. slot i takes
// t[f[i]] when applying f after g... (resolved by table lookup).
Perm perm_compose(const Perm& f, const Perm& g);
Perm perm_inverse(const Perm& p);

struct Isometry {
  Mat2 a, b, c;  // determinant 1
  int k = 0;     // Z2 bit: all three matrices premultiplied by the split
                 // generator i when k = 1
  Perm perm;

  Isometry() : a(Mat2::identity()), b(Mat2::identity()), c(Mat2::identity()) {}
  Isometry(const Mat2& ma, const Mat2& mb, const Mat2& mc, int kk = 0,
           Perm p = Perm{});

  static Isometry identity() { return Isometry(); }
  static Isometry from_perm(Perm p) {
    Isometry f;
    f.perm = p;
    return f;
  }
};

// Raw action on a pair of matrices; templated so the same code runs on
// complex matrices (used by the derivative machinery downstream).
template <class T>
std::pair<Mat2T<T>, Mat2T<T>> act_pair(const Isometry& f, const Mat2T<T>& p,
                                       const Mat2T<T>& q);

Point act(const Isometry& f, const Point& pt);

// Differential: the inner-translation part is exact (conjugation by the c
// factor); the permutation part is differentiated by central differences on
// exponential curves. fd_step is for the permutation part only.
TangentVec differential(const Isometry& f, const TangentVec& x,
                        double fd_step = 1e-5);

// All-closed-form differential; used where the finite-difference noise
// matters. Agrees with `differential` to ~1e-10.
TangentVec differential_closed(const Isometry& f, const TangentVec& x);

// Composition: pointwise canonicalisation. Acts with f-after-g on a fixed
// probe set and solves for the canonical representative (a, b, c, k, perm);
// throws CompositionError if no candidate reproduces the action within tol.
Isometry compose(const Isometry& f, const Isometry& g,
                 double tol = default_tol().compose_tol);

// Algebraic composition through the semidirect cocycle (slot-shuffled
// matrix products); cross-checked against `compose` in the tests.
Isometry compose_exact(const Isometry& f, const Isometry& g);

struct IsometryReport {
  double metric_residual = 0.0;  // max |g(dF X, dF Y) - g(X, Y)|
  int j_sign = 1;                // detected sign in J dF = sign dF J
  double j_residual = 0.0;       // residual of the detected J law
  int p_tau_idx = 0;             // detected tau index in the P law
  double p_residual = 0.0;       // residual of the detected P law
  int samples = 0;
};

// Samples random points/tangents and measures metric preservation and the
// J- and P-equivariance laws, detecting the sign and angle rather than
// assuming the declared ones.
IsometryReport verify_isometry(const Isometry& f, RngStream& rng, int samples);

Isometry random_isometry(RngStream& rng);

}  // namespace nklab

#endif
