#ifndef NKLAB_TOLERANCES_HPP
#define NKLAB_TOLERANCES_HPP

// Central numerical thresholds. Exact algebraic identities are checked near
// machine precision; anything that goes through finite differencing gets the
// looser fd tolerance. Keeping them in one struct makes the CLI flags
// (--tol-exact, --tol-fd, --fd-step) trivial to wire through.

namespace nklab {

struct Tolerances {
  // Identities that hold exactly in exact arithmetic (metric values, J^2 = -1,
  // bracket tables, curvature identities evaluated through closed forms).
  double exact = 1e-12;

  // Residuals contaminated by finite-difference truncation error.
  double fd = 1e-6;

  // Step size for the public finite-difference differentiations.
  double fd_step = 1e-4;

  // Constructor guards: |trace| bound for traceless 2x2 inputs and
  // |det - 1| bound (relative to squared scale) for unimodular inputs.
  double trace_tol = 1e-9;
  double det_tol = 1e-9;

  // solve_conjugation: allowed deviation between the two Gram matrices.
  double gram_tol = 1e-8;

  // compose: max action mismatch of the canonical form vs the raw product.
  double compose_tol = 1e-7;

  // Degenerate-plane rejection threshold for sectional curvature.
  double plane_tol = 1e-9;
};

inline const Tolerances& default_tol() {
  static const Tolerances t{};
  return t;
}

}  // namespace nklab

#endif
