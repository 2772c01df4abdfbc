// Conjugation solving and random sampling for the 2x2 split algebra.

#include "nklab/split_mat.hpp"

#include <Eigen/Dense>
#include <sstream>

namespace nklab {

ConjugationResult solve_conjugation(const BasisTriple& a, const BasisTriple& b,
                                    double gram_tol) {
  // A conjugation preserves the inner product, so matching Gram matrices is a
  // necessary condition; check it up front for a clean error.
  double gram_dev = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double ga = minkowski_inner(a[i], a[j]);
      double gb = minkowski_inner(b[i], b[j]);
      gram_dev = std::max(gram_dev, std::abs(ga - gb));
    }
  }
  if (gram_dev > gram_tol) {
    std::ostringstream os;
    os << "solve_conjugation: Gram matrices differ by " << gram_dev
       << " (tolerance " << gram_tol << ")";
    throw GramMismatch(os.str());
  }

  // b_i c - c a_i = 0 for each i is 12 linear equations in the 4 entries of
  // c = [c00 c01; c10 c11]; the kernel of the stacked system gives c up to
  // scale.
  Eigen::Matrix<double, 12, 4> sys = Eigen::Matrix<double, 12, 4>::Zero();
  for (int i = 0; i < 3; ++i) {
    const Mat2& A = a[i].mat();
    const Mat2& B = b[i].mat();
    double Ae[2][2] = {{A.m00, A.m01}, {A.m10, A.m11}};
    double Be[2][2] = {{B.m00, B.m01}, {B.m10, B.m11}};
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) {
        int row = 4 * i + 2 * r + s;
        for (int t = 0; t < 2; ++t) {
          sys(row, 2 * t + s) += Be[r][t];   // (B c)_{rs} term
          sys(row, 2 * r + t) -= Ae[t][s];   // (c A)_{rs} term
        }
      }
    }
  }

  Eigen::JacobiSVD<Eigen::Matrix<double, 12, 4>> svd(
      sys, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double scale = sv(0);
  if (scale <= 0.0) {
    throw NoSolution("solve_conjugation: zero system (degenerate input)");
  }
  // One-dimensional kernel: smallest singular value ~ 0, second smallest not.
  if (sv(3) > 1e-7 * scale) {
    std::ostringstream os;
    os << "solve_conjugation: no conjugating matrix (smallest singular value "
       << sv(3) << " vs scale " << scale << ")";
    throw NoSolution(os.str());
  }
  if (sv(2) < 1e-6 * scale) {
    std::ostringstream os;
    os << "solve_conjugation: conjugator not unique (second singular value "
       << sv(2) << " vs scale " << scale << ")";
    throw NoSolution(os.str());
  }

  Eigen::Vector4d v = svd.matrixV().col(3);
  Mat2 c{v(0), v(1), v(2), v(3)};
  double d = c.det();
  double sz = frobenius(c);
  if (std::abs(d) < 1e-10 * sz * sz) {
    std::ostringstream os;
    os << "solve_conjugation: kernel element is singular (det " << d << ")";
    throw NoSolution(os.str());
  }
  int det_sign = d > 0.0 ? 1 : -1;
  c *= 1.0 / std::sqrt(std::abs(d));

  // Deterministic sign: first entry (row-major) with magnitude > 1e-9 made
  // positive.
  double entries[4] = {c.m00, c.m01, c.m10, c.m11};
  for (double e : entries) {
    if (std::abs(e) > 1e-9) {
      if (e < 0.0) c *= -1.0;
      break;
    }
  }
  return {c, det_sign};
}

Sl2Vec random_traceless(RngStream& rng) {
  double e00 = rng.uniform(-1.0, 1.0);
  double e01 = rng.uniform(-1.0, 1.0);
  double e10 = rng.uniform(-1.0, 1.0);
  return Sl2Vec::unchecked({e00, e01, e10, -e00});
}

Mat2 random_sl2(RngStream& rng) { return exp_sl2(random_traceless(rng)); }

}  // namespace nklab
