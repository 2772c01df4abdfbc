#ifndef NKLAB_CATALOG_HPP
#define NKLAB_CATALOG_HPP

// The eight homogeneous Lagrangian immersions of the classification table:
// closed-form evaluation (templated over the scalar so the complex-step
// derivative path reuses the same code), the SL(2,R) chart used by the
// group-domain rows, coordinate pushforwards in left Lie-algebra coordinates
// (public finite-difference contract plus a machine-precision complex-step
// variant), the generating subalgebras of the three Bianchi-type rows with
// their bracket tables, and each row's expected invariant profile.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nklab/nk_core.hpp"

namespace nklab {

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

enum class ImmersionId {
  DiagTotGeo,          // row 1: u -> (u, u)
  BergerSpacelike,     // row 2: u -> (u, i u i)
  BergerTimelike,      // row 3: u -> (u, -k u k)
  PslConjugation,      // row 4: u -> (i u i u^-1, j u j u^-1)
  FlatTorus,           // row 5: (u,v,w) -> (e^{vi} e^{-uk}, e^{wj} e^{-uk})
  BianchiV_iota,       // row 6: orbit map of a Bianchi-V subgroup
  BianchiIII_f_lambda, // row 7: lambda-family of Bianchi-III orbit maps
  BianchiVI_jmath,     // row 8: orbit map of a Bianchi-VI subgroup
};

const std::array<ImmersionId, 8>& all_immersions();

// Stable lowercase token used by the CLI and the JSON reports.
std::string id_token(ImmersionId id);
std::optional<ImmersionId> parse_id(const std::string& token);

// Row number in the classification table, 1-based.
int row_number(ImmersionId id);

// Immersion plus its family parameter (meaningful only for the lambda row).
struct ImmersionRef {
  ImmersionId id = ImmersionId::DiagTotGeo;
  double lambda = 2.0;
};

// Default parameter grid for the lambda family.
const std::vector<double>& lambda_grid();

// Parameter point. For rows 1-4 these are chart coordinates of the group
// element; for rows 5-8 they are the global coordinates of the row's formula.
struct ParamPoint {
  double u = 0.0, v = 0.0, w = 0.0;

  std::array<double, 3> arr() const { return {u, v, w}; }
  static ParamPoint from_arr(const std::array<double, 3>& a) {
    return {a[0], a[1], a[2]};
  }
};

// Sampling box used by all random parameter draws: [-1,1]^3.
inline constexpr double kDomainHalfWidth = 1.0;
ParamPoint random_param(RngStream& rng);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

// Chart for the group-domain rows: (x,y,z) -> e^{xi} e^{yj} e^{zk}.
template <class T>
Mat2T<T> chart_sl2(const T& x, const T& y, const T& z);

Mat2 chart_sl2(const ParamPoint& prm);

// Group-level map of rows 1-4 applied to an arbitrary unimodular u;
// NotApplicable for rows 5-8 (their domain is not the group).
Point evaluate_group(ImmersionId id, const Mat2& u);

// Pair of 2x2 matrices over an arbitrary scalar; the complex instantiation
// carries the complex-step perturbation through the whole formula.
template <class T>
struct MatPairT {
  Mat2T<T> p, q;
};

template <class T>
MatPairT<T> evaluate_t(const ImmersionRef& ref, const T& u, const T& v,
                       const T& w);

// Validated evaluation; throws DomainError for non-finite or absurdly large
// parameters (the formulas are entire, so the guard is an overflow guard,
// not a singularity map).
Point evaluate(const ImmersionRef& ref, const ParamPoint& prm);

// ---------------------------------------------------------------------------
// Pushforwards
// ---------------------------------------------------------------------------

// Coordinate-direction pushforwards in left Lie-algebra coordinates
// alpha = p^-1 dp, beta = q^-1 dq, by 5-point central differences on the
// matrix entries. If the left-translation residual (the trace of the raw
// alpha or beta) exceeds 1e-8 the step is halved once; a second failure
// raises DegenerateError, as does a g-degenerate result triple.
std::array<TangentVec, 3> pushforward(const ImmersionRef& ref,
                                      const ParamPoint& prm,
                                      double fd_step = default_tol().fd_step);

// Same quantities via complex-step differentiation: no truncation error, so
// the results are exact to rounding. This is what the analysis layers use
// internally; `pushforward` is the independently checkable contract.
std::array<TangentVec, 3> pushforward_exact(const ImmersionRef& ref,
                                            const ParamPoint& prm);

// ---------------------------------------------------------------------------
// Generating subalgebras (rows 6-8)
// ---------------------------------------------------------------------------

// Element of the triple algebra sl(2,R)^3, acting on the product by
// (T1,T2,T3).(p,q) = (T1 p T3^-1, T2 q T3^-1) at the group level.
using AlgebraTriple = std::array<Sl2Vec, 3>;

// Slotwise matrix commutator [x,y] (the bracket of the isometry group).
AlgebraTriple bracket_triple(const AlgebraTriple& x, const AlgebraTriple& y);

struct SubalgebraSpec {
  std::array<AlgebraTriple, 3> basis;  // e1, e2, e3
  // expected[r] holds the coefficients of [e_i, e_j] in the basis, for the
  // pairs (i,j) = (1,2), (1,3), (2,3) in that order.
  std::array<std::array<double, 3>, 3> expected{};
};

// Basis and bracket table of the generating subgroup; NotApplicable for
// rows 1-5 (their generating groups are graphs, not printed bases).
SubalgebraSpec subalgebra(const ImmersionRef& ref);

// Max coordinate-norm residual of the stated bracket relations.
double subalgebra_bracket_residual(const SubalgebraSpec& spec);

// ---------------------------------------------------------------------------
// Expected invariant profiles
// ---------------------------------------------------------------------------

enum class LagType { I, II, III, IV };

std::string lag_type_name(LagType t);

struct ExpectedProfile {
  LagType lag_type = LagType::I;
  std::vector<double> angles;     // empty when the table states none
  std::optional<double> K;        // sectional curvature, when constant
  bool tot_geodesic = false;
  int delta_tag = 1;              // 1 or 2: which Gram pattern the frame takes
  std::optional<int> b_sign;      // row 8 only
  // Named frame constants (second-fundamental-form and connection
  // coefficients) in a fixed order, for report output.
  std::vector<std::pair<std::string, double>> constants;
};

ExpectedProfile expected_profile(const ImmersionRef& ref);

}  // namespace nklab

#endif
