#include "nklab/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace nklab {

namespace {

constexpr double kParamBound = 1e3;

template <class T>
Mat2T<T> cast_mat(const Mat2& m) {
  return {T(m.m00), T(m.m01), T(m.m10), T(m.m11)};
}

// w / sinh(w), extended through w = 0 by its even power series. The series
// branch keeps the function smooth across the switch for both real and
// complex-step arguments (relative error ~ |w|^6 at the 1e-4 boundary).
template <class T>
T w_over_sinh(const T& w) {
  if (std::abs(w) < 1e-4) {
    T w2 = w * w;
    return T(1) - w2 / T(6) + T(7) * w2 * w2 / T(360);
  }
  return w / std::sinh(w);
}

// x / (e^x - 1), extended through x = 0.
template <class T>
T x_over_expm1(const T& x) {
  if (std::abs(x) < 1e-4) {
    T x2 = x * x;
    return T(1) - x / T(2) + x2 / T(12) - x2 * x2 / T(720);
  }
  return x / (std::exp(x) - T(1));
}

// Row-specific removable-singularity coefficients.
template <class T>
T coef_row6(const T& w) {
  return std::exp(w) * w_over_sinh(w);
}
template <class T>
T coef_row7(const T& w) {
  return std::exp(-w) * w_over_sinh(w);
}
template <class T>
T coef_row8_u(const T& v) {
  return std::exp(T(2) * v) * x_over_expm1(T(2) * v);
}
template <class T>
T coef_row8_w(const T& v) {
  return x_over_expm1(v);
}

// ---------------------------------------------------------------------------
// Subalgebra bases (rows 6-8), exactly as printed.
// ---------------------------------------------------------------------------

AlgebraTriple basis_e(double a0, double a1, double a2, double b0, double b1,
                      double b2, double c0, double c1, double c2) {
  return {Sl2Vec::from_xyz(a0, a1, a2), Sl2Vec::from_xyz(b0, b1, b2),
          Sl2Vec::from_xyz(c0, c1, c2)};
}

std::array<AlgebraTriple, 3> basis_row6() {
  return {
      basis_e(1, 0, 0, -1, 0, 0, -1, 0, 0),               // (i, -i, -i)
      basis_e(0, 2.25, -2.25, 0, 0.5, 0.5, 0, 0, 0),      // (9/4(j-k), (j+k)/2, 0)
      basis_e(0, -2.25, 2.25, 0, 0, 0, 0, 0.5, 0.5),      // (9/4(k-j), 0, (j+k)/2)
  };
}

std::array<AlgebraTriple, 3> basis_row7(double lam) {
  return {
      basis_e(1, 0, 0, 0, 0, 0, 0, 0, 0),       // (i, 0, 0)
      basis_e(0, 0.5, 0.5, 0, 0, 0, 0, 0, 0),   // ((j+k)/2, 0, 0)
      basis_e(0, 0, 0,
              0, -(lam + 7.0) / 6.0, (11.0 - lam) / 6.0,
              0, -(lam + 9.0) / 6.0, (9.0 - lam) / 6.0),
  };
}

std::array<AlgebraTriple, 3> basis_row8() {
  const double r6 = std::sqrt(6.0);
  const double s23 = std::sqrt(2.0 / 3.0);
  return {
      basis_e((27.0 + 2.0 * r6) / 18.0, -(2.0 * s23 + 0.75),
              (8.0 / 3.0) * s23 + 0.75,
              -(1.0 + 17.0 / (12.0 * r6)), (48.0 - 17.0 * r6) / 96.0,
              -(0.5 + 85.0 / (48.0 * r6)),
              -0.5, 0.25 * (1.0 - 3.0 * r6), 0.25 * (3.0 * r6 - 1.0)),
      basis_e(0, 0, 0,
              s23, 0.5 * std::sqrt(1.5), 5.0 / (2.0 * r6),
              0, 0, 0),
      basis_e((8.0 / 9.0) * (2.0 + 3.0 * r6), -(2.0 / 3.0) * (7.0 + 2.0 * r6),
              (2.0 / 9.0) * (37.0 + 6.0 * r6),
              0, 0, 0,
              0, -6.0, 6.0),
  };
}

// Exponentiate the triple and act on (Id, Id):
// (T1, T2, T3).(Id, Id) = (T1 T3^-1, T2 T3^-1).
template <class T>
MatPairT<T> exp_triple_act(const std::array<Mat2T<T>, 3>& slots) {
  Mat2T<T> t1 = exp_traceless(slots[0]);
  Mat2T<T> t2 = exp_traceless(slots[1]);
  Mat2T<T> t3i = exp_traceless(slots[2]).inverse();
  return {t1 * t3i, t2 * t3i};
}

template <class T>
std::array<Mat2T<T>, 3> combine(const std::array<AlgebraTriple, 3>& e,
                                const T& c1, const T& c2, const T& c3) {
  std::array<Mat2T<T>, 3> out;
  for (int slot = 0; slot < 3; ++slot) {
    Mat2T<T> m = c1 * cast_mat<T>(e[0][slot].mat());
    m += c2 * cast_mat<T>(e[1][slot].mat());
    m += c3 * cast_mat<T>(e[2][slot].mat());
    out[slot] = m;
  }
  return out;
}

void check_param(const ParamPoint& prm) {
  for (double x : prm.arr()) {
    if (!std::isfinite(x) || std::abs(x) > kParamBound) {
      throw DomainError("evaluate: parameter " + std::to_string(x) +
                        " is not finite or exceeds the bound " +
                        std::to_string(kParamBound));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

const std::array<ImmersionId, 8>& all_immersions() {
  static const std::array<ImmersionId, 8> ids = {
      ImmersionId::DiagTotGeo,      ImmersionId::BergerSpacelike,
      ImmersionId::BergerTimelike,  ImmersionId::PslConjugation,
      ImmersionId::FlatTorus,       ImmersionId::BianchiV_iota,
      ImmersionId::BianchiIII_f_lambda, ImmersionId::BianchiVI_jmath};
  return ids;
}

std::string id_token(ImmersionId id) {
  switch (id) {
    case ImmersionId::DiagTotGeo: return "diag";
    case ImmersionId::BergerSpacelike: return "berger_spacelike";
    case ImmersionId::BergerTimelike: return "berger_timelike";
    case ImmersionId::PslConjugation: return "psl";
    case ImmersionId::FlatTorus: return "torus";
    case ImmersionId::BianchiV_iota: return "iota";
    case ImmersionId::BianchiIII_f_lambda: return "f_lambda";
    case ImmersionId::BianchiVI_jmath: return "jmath";
  }
  return "unknown";
}

std::optional<ImmersionId> parse_id(const std::string& token) {
  for (ImmersionId id : all_immersions()) {
    if (id_token(id) == token) return id;
  }
  return std::nullopt;
}

int row_number(ImmersionId id) {
  const auto& ids = all_immersions();
  for (int i = 0; i < 8; ++i) {
    if (ids[i] == id) return i + 1;
  }
  return 0;
}

const std::vector<double>& lambda_grid() {
  static const std::vector<double> grid = {-1.0, 0.5, 2.0, 3.0};
  return grid;
}

ParamPoint random_param(RngStream& rng) {
  ParamPoint p;
  p.u = rng.uniform(-kDomainHalfWidth, kDomainHalfWidth);
  p.v = rng.uniform(-kDomainHalfWidth, kDomainHalfWidth);
  p.w = rng.uniform(-kDomainHalfWidth, kDomainHalfWidth);
  return p;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

template <class T>
Mat2T<T> chart_sl2(const T& x, const T& y, const T& z) {
  Mat2T<T> xi{x, T(0), T(0), -x};
  Mat2T<T> yj{T(0), y, y, T(0)};
  Mat2T<T> zk{T(0), z, -z, T(0)};
  return exp_traceless(xi) * exp_traceless(yj) * exp_traceless(zk);
}

template Mat2T<double> chart_sl2<double>(const double&, const double&,
                                         const double&);
template Mat2T<std::complex<double>> chart_sl2<std::complex<double>>(
    const std::complex<double>&, const std::complex<double>&,
    const std::complex<double>&);

Mat2 chart_sl2(const ParamPoint& prm) {
  return chart_sl2<double>(prm.u, prm.v, prm.w);
}

Point evaluate_group(ImmersionId id, const Mat2& u) {
  Mat2 bi = basis_i(), bj = basis_j(), bk = basis_k();
  switch (id) {
    case ImmersionId::DiagTotGeo:
      return Point(u, u);
    case ImmersionId::BergerSpacelike:
      return Point(u, bi * u * bi);
    case ImmersionId::BergerTimelike:
      return Point(u, -(bk * u * bk));
    case ImmersionId::PslConjugation: {
      Mat2 ui = u.inverse();
      return Point(bi * u * bi * ui, bj * u * bj * ui);
    }
    default:
      throw NotApplicable("evaluate_group: row " +
                          std::to_string(row_number(id)) +
                          " is not defined on the group");
  }
}

template <class T>
MatPairT<T> evaluate_t(const ImmersionRef& ref, const T& u, const T& v,
                       const T& w) {
  switch (ref.id) {
    case ImmersionId::DiagTotGeo: {
      Mat2T<T> m = chart_sl2(u, v, w);
      return {m, m};
    }
    case ImmersionId::BergerSpacelike: {
      Mat2T<T> m = chart_sl2(u, v, w);
      Mat2T<T> bi = cast_mat<T>(basis_i());
      return {m, bi * m * bi};
    }
    case ImmersionId::BergerTimelike: {
      Mat2T<T> m = chart_sl2(u, v, w);
      Mat2T<T> bk = cast_mat<T>(basis_k());
      return {m, T(-1) * (bk * m * bk)};
    }
    case ImmersionId::PslConjugation: {
      Mat2T<T> m = chart_sl2(u, v, w);
      Mat2T<T> mi = m.inverse();
      Mat2T<T> bi = cast_mat<T>(basis_i());
      Mat2T<T> bj = cast_mat<T>(basis_j());
      return {bi * m * bi * mi, bj * m * bj * mi};
    }
    case ImmersionId::FlatTorus: {
      Mat2T<T> vi{v, T(0), T(0), -v};
      Mat2T<T> wj{T(0), w, w, T(0)};
      Mat2T<T> muk{T(0), -u, u, T(0)};
      Mat2T<T> tail = exp_traceless(muk);
      return {exp_traceless(vi) * tail, exp_traceless(wj) * tail};
    }
    case ImmersionId::BianchiV_iota: {
      static const auto e = basis_row6();
      T c = coef_row6(w);
      return exp_triple_act(combine(e, w, u * c, v * c));
    }
    case ImmersionId::BianchiIII_f_lambda: {
      const auto e = basis_row7(ref.lambda);
      T c = coef_row7(w);
      return exp_triple_act(combine(e, w, u * c, v));
    }
    case ImmersionId::BianchiVI_jmath: {
      static const auto e = basis_row8();
      T cu = coef_row8_u(v);
      T cw = coef_row8_w(v);
      return exp_triple_act(combine(e, v, u * cu, w * cw));
    }
  }
  throw InvalidInput("evaluate: unknown immersion id");
}

template MatPairT<double> evaluate_t<double>(const ImmersionRef&,
                                             const double&, const double&,
                                             const double&);
template MatPairT<std::complex<double>> evaluate_t<std::complex<double>>(
    const ImmersionRef&, const std::complex<double>&,
    const std::complex<double>&, const std::complex<double>&);

Point evaluate(const ImmersionRef& ref, const ParamPoint& prm) {
  check_param(prm);
  MatPairT<double> pq = evaluate_t<double>(ref, prm.u, prm.v, prm.w);
  return Point(pq.p, pq.q);
}

// ---------------------------------------------------------------------------
// Pushforwards
// ---------------------------------------------------------------------------

namespace {

struct RawDerivs {
  Mat2 dp, dq;
  double trace_resid;  // after left translation
};

RawDerivs fd_direction(const ImmersionRef& ref, const ParamPoint& prm, int d,
                       double h, const Mat2& p0i, const Mat2& q0i) {
  auto at = [&](double t) {
    std::array<double, 3> a = prm.arr();
    a[d] += t;
    return evaluate_t<double>(ref, a[0], a[1], a[2]);
  };
  MatPairT<double> m2 = at(-2 * h), m1 = at(-h), p1 = at(h), p2 = at(2 * h);
  double s = 1.0 / (12.0 * h);
  RawDerivs out;
  out.dp = s * (m2.p - p2.p + 8.0 * (p1.p - m1.p));
  out.dq = s * (m2.q - p2.q + 8.0 * (p1.q - m1.q));
  Mat2 al = p0i * out.dp;
  Mat2 be = q0i * out.dq;
  out.trace_resid = std::max(std::abs(al.trace()), std::abs(be.trace()));
  return out;
}

std::array<TangentVec, 3> assemble(const Point& base,
                                   const std::array<Mat2, 3>& alphas,
                                   const std::array<Mat2, 3>& betas) {
  std::array<TangentVec, 3> out;
  Eigen::Matrix3d gram;
  for (int d = 0; d < 3; ++d) {
    out[d].base = base;
    out[d].alpha = Sl2Vec::unchecked(alphas[d]);
    out[d].beta = Sl2Vec::unchecked(betas[d]);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      gram(i, j) = metric_g(out[i].algebra(), out[j].algebra());
    }
  }
  if (std::abs(gram.determinant()) < 1e-10) {
    throw DegenerateError(
        "pushforward: tangent triple is numerically degenerate (Gram "
        "determinant " +
        std::to_string(gram.determinant()) + ")");
  }
  return out;
}

}  // namespace

std::array<TangentVec, 3> pushforward(const ImmersionRef& ref,
                                      const ParamPoint& prm, double fd_step) {
  check_param(prm);
  Point base = evaluate(ref, prm);
  Mat2 p0i = base.a.inverse(), q0i = base.b.inverse();
  std::array<Mat2, 3> alphas, betas;
  for (int d = 0; d < 3; ++d) {
    RawDerivs rd = fd_direction(ref, prm, d, fd_step, p0i, q0i);
    if (rd.trace_resid > 1e-8) {
      rd = fd_direction(ref, prm, d, 0.5 * fd_step, p0i, q0i);
      if (rd.trace_resid > 1e-8) {
        throw DegenerateError(
            "pushforward: left-translation trace residual " +
            std::to_string(rd.trace_resid) +
            " persists after step refinement");
      }
    }
    alphas[d] = p0i * rd.dp;
    betas[d] = q0i * rd.dq;
  }
  return assemble(base, alphas, betas);
}

std::array<TangentVec, 3> pushforward_exact(const ImmersionRef& ref,
                                            const ParamPoint& prm) {
  using C = std::complex<double>;
  check_param(prm);
  Point base = evaluate(ref, prm);
  Mat2 p0i = base.a.inverse(), q0i = base.b.inverse();
  const double h = 1e-100;
  std::array<Mat2, 3> alphas, betas;
  for (int d = 0; d < 3; ++d) {
    std::array<C, 3> a = {C(prm.u), C(prm.v), C(prm.w)};
    a[d] += C(0.0, h);
    MatPairT<C> pert = evaluate_t<C>(ref, a[0], a[1], a[2]);
    Mat2 dp = (1.0 / h) * imag_part(pert.p);
    Mat2 dq = (1.0 / h) * imag_part(pert.q);
    alphas[d] = p0i * dp;
    betas[d] = q0i * dq;
  }
  return assemble(base, alphas, betas);
}

// ---------------------------------------------------------------------------
// Subalgebras
// ---------------------------------------------------------------------------

AlgebraTriple bracket_triple(const AlgebraTriple& x, const AlgebraTriple& y) {
  AlgebraTriple out;
  for (int s = 0; s < 3; ++s) {
    out[s] = Sl2Vec::unchecked(x[s].mat() * y[s].mat() -
                               y[s].mat() * x[s].mat());
  }
  return out;
}

SubalgebraSpec subalgebra(const ImmersionRef& ref) {
  SubalgebraSpec spec;
  switch (ref.id) {
    case ImmersionId::BianchiV_iota:
      spec.basis = basis_row6();
      spec.expected = {{{0, -2, 0}, {0, 0, -2}, {0, 0, 0}}};
      return spec;
    case ImmersionId::BianchiIII_f_lambda:
      spec.basis = basis_row7(ref.lambda);
      spec.expected = {{{0, 2, 0}, {0, 0, 0}, {0, 0, 0}}};
      return spec;
    case ImmersionId::BianchiVI_jmath:
      spec.basis = basis_row8();
      spec.expected = {{{0, -2, 0}, {0, 0, 1}, {0, 0, 0}}};
      return spec;
    default:
      throw NotApplicable("subalgebra: row " +
                          std::to_string(row_number(ref.id)) +
                          " has no printed subalgebra basis");
  }
}

double subalgebra_bracket_residual(const SubalgebraSpec& spec) {
  const std::array<std::pair<int, int>, 3> pairs = {
      std::pair<int, int>{0, 1}, {0, 2}, {1, 2}};
  double worst = 0.0;
  for (int r = 0; r < 3; ++r) {
    AlgebraTriple br = bracket_triple(spec.basis[pairs[r].first],
                                      spec.basis[pairs[r].second]);
    for (int s = 0; s < 3; ++s) {
      Mat2 want = Mat2::zero();
      for (int k = 0; k < 3; ++k) {
        want += spec.expected[r][k] * spec.basis[k][s].mat();
      }
      worst = std::max(worst, max_abs(br[s].mat() - want));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Expected profiles
// ---------------------------------------------------------------------------

std::string lag_type_name(LagType t) {
  switch (t) {
    case LagType::I: return "I";
    case LagType::II: return "II";
    case LagType::III: return "III";
    case LagType::IV: return "IV";
  }
  return "?";
}

ExpectedProfile expected_profile(const ImmersionRef& ref) {
  const double pi = std::acos(-1.0);
  const double s2 = std::sqrt(2.0);
  const double s32 = std::sqrt(1.5);
  const double s23 = std::sqrt(2.0 / 3.0);
  ExpectedProfile p;
  switch (ref.id) {
    case ImmersionId::DiagTotGeo:
      p.lag_type = LagType::I;
      p.angles = {0, 0, 0};
      p.K = -1.5;
      p.tot_geodesic = true;
      p.delta_tag = 1;
      return p;
    case ImmersionId::BergerSpacelike:
    case ImmersionId::BergerTimelike:
      p.lag_type = LagType::I;
      p.angles = {0, pi / 2, pi / 2};
      p.tot_geodesic = true;  // K is plane-dependent: no table entry
      p.delta_tag = 1;
      return p;
    case ImmersionId::PslConjugation:
      p.lag_type = LagType::I;
      p.angles = {0, pi / 3, 2 * pi / 3};
      p.K = -3.0 / 8.0;
      p.delta_tag = 1;
      p.constants = {{"h12^3", 1.0 / (2.0 * s2)}};
      return p;
    case ImmersionId::FlatTorus:
      p.lag_type = LagType::I;
      p.angles = {0, pi / 3, 2 * pi / 3};
      p.K = 0.0;
      p.delta_tag = 1;
      p.constants = {{"h12^3", -1.0 / s2}};
      return p;
    case ImmersionId::BianchiV_iota:
      p.lag_type = LagType::II;
      p.angles = {pi / 3, pi / 3};
      p.K = -1.5;
      p.delta_tag = 2;
      p.constants = {{"h22^3", -s2 / 3.0}, {"w12^3", -s32},
                     {"w21^3", -s32},      {"w31^1", 0.0},
                     {"w33^2", 0.0},       {"w22^3", 0.0}};
      return p;
    case ImmersionId::BianchiIII_f_lambda:
      p.lag_type = LagType::II;
      p.angles = {pi / 3, pi / 3};
      p.K = -1.5;
      p.delta_tag = 2;
      p.constants = {{"h22^3", 2.0 * s2 / 3.0},
                     {"w12^3", s32},
                     {"w21^3", s32},
                     {"w31^1", s32},
                     {"w33^2", 0.0},
                     {"w22^3", s23 * (1.0 - ref.lambda)}};
      return p;
    case ImmersionId::BianchiVI_jmath:
      p.lag_type = LagType::III;
      p.delta_tag = 2;
      p.b_sign = -1;
      p.constants = {{"h22^2", 2.0 * s2 / 3.0},
                     {"h22^1", -13.0 / (18.0 * s2)},
                     {"h22^3", 5.0 * s2 / 9.0},
                     {"h11", 0.0},
                     {"h12^3", 0.0}};
      return p;
  }
  throw InvalidInput("expected_profile: unknown immersion id");
}

}  // namespace nklab
