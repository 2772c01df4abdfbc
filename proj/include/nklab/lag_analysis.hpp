#ifndef NKLAB_LAG_ANALYSIS_HPP
#define NKLAB_LAG_ANALYSIS_HPP

// Frame analysis of the catalog immersions: Lagrangian check, extraction of
// the endomorphism pair (A, B) with P = A + JB on the submanifold, the
// four-way eigenstructure classification, construction of normalized frames
// whose Gram is one of the Delta matrices, second-fundamental-form and
// connection tables, sectional curvature (extrinsic and intrinsic routes),
// Gauss/Codazzi residuals, and the per-type constraint relations.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nklab/catalog.hpp"
#include "nklab/isometry.hpp"
#include "nklab/nk_core.hpp"

namespace nklab {

// Three tangent vectors with a common base point.
using FrameTriple = std::array<TangentVec, 3>;

// Rank-3 coefficient table indexed [i][j][k].
using Coef3 = std::array<std::array<std::array<double, 3>, 3>, 3>;

// 3x3 Gram of the frame in the ambient metric.
Eigen::Matrix3d frame_gram(const FrameTriple& frame);

// Coefficients of an ambient tangent vector in the basis {E_j, JE_j}: the
// first three are the tangent part, the last three the J-tangent part.
// Throws DegenerateGram if the combined 6x6 Gram is singular.
Eigen::Matrix<double, 6, 1> tangent_normal_coords(const FrameTriple& frame,
                                                  const AlgebraVec& v);

// Max |g(J E_i, E_j)| over all i, j: zero iff the frame spans a Lagrangian
// tangent space.
double check_lagrangian(const FrameTriple& frame);

// ---------------------------------------------------------------------------
// The endomorphism pair P = A + JB
// ---------------------------------------------------------------------------

struct ABPair {
  Eigen::Matrix3d A, B;
  double recon_residual = 0.0;  // reconstruction error of the P-decomposition
};

// Decompose P E_i into tangent and J-tangent parts over the frame.
ABPair extract_AB(const FrameTriple& frame);

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

// Eigenstructure class of A (g-symmetric for an indefinite metric):
//   I:   three real eigenvalues, diagonalizable;
//   II:  a repeated eigenvalue with a rank-1 nilpotent part (2-block);
//   III: a triple eigenvalue with a rank-2 nilpotent part (3-chain);
//   IV:  a complex-conjugate eigenvalue pair.
struct TypeClass {
  LagType type = LagType::I;
  // Type I: three angles sorted ascending in [0, pi), ties putting the
  // timelike leg first. Type II / IV: {theta1, theta2}. Type III: empty.
  std::vector<double> angles;
  std::optional<double> psi;   // hyperbolic angle, type IV only
  double disc = 0.0;           // scaled discriminant of A's char. polynomial
  double nilpotent_norm = 0.0; // max-norm of the nilpotent part candidate
};

// Classify from the eigenstructure of A, with angles matched between the
// eigenvalues of A and B (validated by a^2 + b^2 = 1 per matched pair).
// Throws UnresolvedType when the Jordan-detection band cannot decide:
// either the nilpotent norm falls in the gray zone between the
// diagonalizable and Jordan thresholds, or the eigenvalue matching between
// A and B is ambiguous.
TypeClass classify_type(const ABPair& ab, const Eigen::Matrix3d& gram);
TypeClass classify_type(const ABPair& ab, const FrameTriple& frame);

// Shear parameter of the type II frame gauge: the frame is unique up to sign
// once h_22^1 is gauged to zero, which requires dividing by h_22^3. Throws
// GaugeFailure when |h223| is too small relative to |h221|.
double type2_gauge_shift(double h221, double h223);

// ---------------------------------------------------------------------------
// Normalized frames and coefficient tables
// ---------------------------------------------------------------------------

struct NormalFrame {
  FrameTriple frame;       // the normalized frame vectors
  Eigen::Matrix3d coeff;   // rows: F_a = sum_i coeff(a,i) * (coordinate leg i)
  Eigen::Matrix3d gram;    // induced Gram; equals the type's Delta matrix
  Eigen::Matrix3d A, B;    // endomorphism pair in the normalized frame
  int delta_tag = 1;       // 1 (types I), 2 (II, III), 3 (IV)
  int b_sign = +1;         // sign of B in the type III normal form
};

struct GaussCodazziResidual {
  double gauss = 0.0;
  double codazzi = 0.0;
};

// Full per-point analysis: classification, normalized frame, second
// fundamental form h and connection coefficients omega in that frame
// (h(F_a,F_b) = sum h[a][b][c] J F_c, nabla_{F_a} F_b = sum om[a][b][c] F_c),
// and the size of the mean curvature vector.
struct AnalysisResult {
  ImmersionRef ref;
  ParamPoint prm;
  TypeClass type_class;
  NormalFrame nf;
  Coef3 h{};
  Coef3 omega{};
  // Directional derivatives of omega along the frame legs,
  // domega[a][b][c][d] = F_a(om[b][c][d]); needed by the intrinsic
  // curvature route whenever the frame is not fully pinned down by the
  // eigenstructure (then omega need not be constant).
  std::array<Coef3, 3> domega{};
  double mean_curvature = 0.0;      // Euclidean norm of the coordinate-frame
                                    // coefficients of the mean curvature
                                    // vector: zero iff minimal
  double lagrangian_residual = 0.0; // of the coordinate frame
};

AnalysisResult analyze(const ImmersionRef& ref, const ParamPoint& prm);

// Normalized frame only (runs the same construction as analyze).
NormalFrame normal_frame(const ImmersionRef& ref, const ParamPoint& prm);

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

// Sectional curvature of the plane spanned by frame legs (i, j), from the
// ambient curvature identity combined with the shape-operator terms
// evaluated through the metric: g(S_xi X, Y) = g(h(X, Y), xi).
// Throws DegeneratePlane when the plane is degenerate in the induced metric.
double sectional_curvature_gauss(const AnalysisResult& ar, int i, int j);

// Same quantity computed intrinsically from the omega table.
double sectional_curvature_intrinsic(const AnalysisResult& ar, int i, int j);

// Same two routes for the plane spanned by x^a F_a and y^a F_a, with the
// span coefficients given in the normalized frame.
double sectional_curvature_gauss(const AnalysisResult& ar,
                                 const Eigen::Vector3d& x,
                                 const Eigen::Vector3d& y);
double sectional_curvature_intrinsic(const AnalysisResult& ar,
                                     const Eigen::Vector3d& x,
                                     const Eigen::Vector3d& y);

// Extrinsic route cross-checked against the intrinsic one; throws Error if
// the two disagree beyond an internal-consistency bound.
double sectional_curvature(const ImmersionRef& ref, const ParamPoint& prm,
                           int i, int j);

// Max residuals of the fundamental compatibility identities relating the
// induced curvature, h, and (A, B), over all frame index combinations, with
// derivative terms by central differences across parameter space. Evaluated
// in the coordinate frame (no normalization needed).
GaussCodazziResidual gauss_codazzi_residual(const ImmersionRef& ref,
                                            const ParamPoint& prm);

// ---------------------------------------------------------------------------
// Structure tables and per-type constraints
// ---------------------------------------------------------------------------

// jg[i][j][k]: coefficient of E_k in the tangent decomposition of
// J G(E_i, E_j). For a normalized frame the nonzero entries are +-sqrt(2/3)
// in the pattern fixed by the frame's Delta matrix.
Coef3 jg_table(const FrameTriple& frame);

// Max |g(G(E_i, E_j), E_k)|: G of two tangent vectors is normal, so this
// vanishes on Lagrangian frames.
double g_normality_residual(const FrameTriple& frame);

// Named residuals of the constraint relations the detected type must
// satisfy, including near-zero finite-difference constancy of the angle
// functions across the parameter domain.
struct ConstraintReport {
  LagType type = LagType::I;
  std::vector<std::pair<std::string, double>> residuals;
  double worst = 0.0;
  double angle_derivative = 0.0;  // max |FD derivative| of any angle
};

ConstraintReport verify_type_constraints(const ImmersionRef& ref,
                                         const ParamPoint& prm);

// ---------------------------------------------------------------------------
// Isometry twist
// ---------------------------------------------------------------------------

// Best match of the pair transformation rule under an ambient isometry:
// A' = cos(tau) A + (-1)^kappa sin(tau) B,
// B' = -sin(tau) A + (-1)^kappa cos(tau) B,
// searched over kappa in {0,1} and tau in {0, 2pi/3, 4pi/3}.
struct TwistMatch {
  int kappa = 0;
  int tau_idx = 0;
  double residual = 0.0;
};

TwistMatch isometry_twist_match(const ABPair& before, const ABPair& after);

}  // namespace nklab

#endif
