// Tests for the immersion catalog. The oracles are independent of the
// implementation: hand-derived closed-form pushforwards for the group-domain
// rows and the flat-torus row, the generating-subalgebra action at the
// origin for the Bianchi rows, the explicit matrix solution of row 6, the
// stated induced metric of row 7, and frozen high-precision evaluation
// anchors computed from the defining formulas.

#include <cmath>
#include <complex>

#include "doctest.h"
#include "nklab/catalog.hpp"

using namespace nklab;

namespace {

constexpr std::uint64_t kSeed = 42;
const double kPi = std::acos(-1.0);

Mat2 Ad(const Mat2& m, const Mat2& x) { return m * x * m.inverse(); }

double mat_dist(const Mat2& a, const Mat2& b) { return max_abs(a - b); }

double point_dist(const Point& a, const Point& b) {
  return std::max(mat_dist(a.a, b.a), mat_dist(a.b, b.b));
}

AlgebraVec algebra_of(const TangentVec& t) { return t.algebra(); }

// Left-invariant coordinates of the chart's coordinate tangents at (x,y,z):
//   d/dx -> Ad(e^{-zk}) Ad(e^{-yj}) i,  d/dy -> Ad(e^{-zk}) j,  d/dz -> k.
std::array<Mat2, 3> chart_tangents(const ParamPoint& prm) {
  Mat2 emy = exp_sl2(Sl2Vec::from_xyz(0, -prm.v, 0));
  Mat2 emz = exp_sl2(Sl2Vec::from_xyz(0, 0, -prm.w));
  return {Ad(emz, Ad(emy, basis_i())), Ad(emz, basis_j()), basis_k()};
}

ImmersionRef ref_of(ImmersionId id, double lam = 2.0) { return {id, lam}; }

const ImmersionRef kRow1 = ref_of(ImmersionId::DiagTotGeo);
const ImmersionRef kRow2 = ref_of(ImmersionId::BergerSpacelike);
const ImmersionRef kRow3 = ref_of(ImmersionId::BergerTimelike);
const ImmersionRef kRow4 = ref_of(ImmersionId::PslConjugation);
const ImmersionRef kRow5 = ref_of(ImmersionId::FlatTorus);
const ImmersionRef kRow6 = ref_of(ImmersionId::BianchiV_iota);
const ImmersionRef kRow7 = ref_of(ImmersionId::BianchiIII_f_lambda, 2.0);
const ImmersionRef kRow8 = ref_of(ImmersionId::BianchiVI_jmath);

std::vector<ImmersionRef> all_refs() {
  std::vector<ImmersionRef> out;
  for (ImmersionId id : all_immersions()) {
    if (id == ImmersionId::BianchiIII_f_lambda) {
      for (double lam : lambda_grid()) out.push_back({id, lam});
    } else {
      out.push_back({id, 2.0});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("identifier plumbing: tokens, rows, lambda grid") {
  CHECK(all_immersions().size() == 8);
  for (ImmersionId id : all_immersions()) {
    auto back = parse_id(id_token(id));
    REQUIRE(back.has_value());
    CHECK(*back == id);
  }
  CHECK(id_token(ImmersionId::PslConjugation) == "psl");
  CHECK(id_token(ImmersionId::BianchiIII_f_lambda) == "f_lambda");
  CHECK(!parse_id("nonsense").has_value());
  CHECK(row_number(ImmersionId::DiagTotGeo) == 1);
  CHECK(row_number(ImmersionId::BianchiVI_jmath) == 8);

  REQUIRE(lambda_grid().size() == 4);
  CHECK(lambda_grid()[0] == -1.0);
  CHECK(lambda_grid()[1] == 0.5);
  CHECK(lambda_grid()[2] == 2.0);
  CHECK(lambda_grid()[3] == 3.0);
}

TEST_CASE("chart: identity, axis value, unimodularity") {
  CHECK(mat_dist(chart_sl2({0, 0, 0}), Mat2::identity()) == 0.0);

  // e^{(pi/2) i} = diag(e^{pi/2}, e^{-pi/2}).
  Mat2 cx = chart_sl2({kPi / 2, 0, 0});
  CHECK(cx.m00 == doctest::Approx(std::exp(kPi / 2)).epsilon(1e-14));
  CHECK(cx.m11 == doctest::Approx(std::exp(-kPi / 2)).epsilon(1e-14));
  CHECK(std::abs(cx.m01) < 1e-15);
  CHECK(std::abs(cx.m10) < 1e-15);

  RngStream rng(kSeed);
  for (int s = 0; s < 25; ++s) {
    ParamPoint prm = random_param(rng);
    CHECK(std::abs(chart_sl2(prm).det() - 1.0) < 1e-12);
  }
}

TEST_CASE("evaluate: stated trivial anchors") {
  Point origin5 = evaluate(kRow5, {0, 0, 0});
  CHECK(point_dist(origin5, Point()) == 0.0);

  Point origin4 = evaluate(kRow4, {0, 0, 0});
  CHECK(point_dist(origin4, Point()) < 1e-15);

  // Flat torus at (0, pi/2, 0): first slot e^{(pi/2) i}, second slot Id.
  Point p = evaluate(kRow5, {0, kPi / 2, 0});
  CHECK(p.a.m00 == doctest::Approx(std::exp(kPi / 2)).epsilon(1e-14));
  CHECK(p.a.m11 == doctest::Approx(std::exp(-kPi / 2)).epsilon(1e-14));
  CHECK(mat_dist(p.b, Mat2::identity()) < 1e-15);
}

TEST_CASE("evaluate: frozen high-precision anchors, rows 4-8") {
  auto check_point = [](const Point& got, const Mat2& p, const Mat2& q) {
    CHECK(mat_dist(got.a, p) < 2e-14);
    CHECK(mat_dist(got.b, q) < 2e-14);
  };
  check_point(evaluate(kRow4, {0.15, -0.2, 0.1}),
              {1.0595228998664288, 0.27522986044701453, 0.44540507030110649,
               1.0595228998664286},
              {0.66559752998529342, -0.2147759246541755, 0.2147759246541755,
               1.4331052313400561});
  check_point(evaluate(kRow5, {0.3, -0.4, 0.25}),
              {0.64038119937020221, -0.19809311853369085, 0.44086434294943866,
               1.4251945690354799},
              {1.0599986137454591, -0.063473648580223627, 0.54613317627902525,
               0.91069452560875974});
  check_point(evaluate(kRow6, {0.1, -0.2, 0.15}),
              {1.349858807576003, 0.26997176151520058, 1.8223093902276042,
               1.1052800987272386},
              {1.0, 0.3, 0.0, 1.0});
  check_point(evaluate(kRow7, {0.12, -0.23, 0.31}),
              {1.3743825042580593, -0.12005371549662157, -0.51504957516496508,
               0.7725895897785211},
              {1.0533680496211126, -0.15605145017844932, 0.024592428435545544,
               0.94569254899798261});
  check_point(evaluate({ImmersionId::BianchiIII_f_lambda, -1.0},
                       {0.12, -0.23, 0.31}),
              {1.2673258242760725, 0.18930601213719347, -0.50162826217330569,
               0.71413265379456858},
              {1.0505990240147747, -0.14802496700869153, 0.023823930008152791,
               0.94848123857814692});
  check_point(evaluate(kRow8, {0.1, 0.2, -0.15}),
              {0.62744461070947899, -0.33798592141547579,
               -0.027618589315549797, 1.6086434995699672},
              {0.91955465292855665, -0.030250363079134996,
               -0.99745880669104336, 1.1202960996152151});
}

TEST_CASE("evaluate: both slots unimodular on every row") {
  RngStream rng(kSeed);
  for (const ImmersionRef& ref : all_refs()) {
    for (int s = 0; s < 20; ++s) {
      Point p = evaluate(ref, random_param(rng));  // Point ctor checks det
      CHECK(std::abs(p.a.det() - 1.0) < 1e-9);
      CHECK(std::abs(p.b.det() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("evaluate_group: rows 1-3 formulas, chart consistency, row-4 "
          "isotropy") {
  RngStream rng(kSeed);
  for (int s = 0; s < 10; ++s) {
    ParamPoint prm = random_param(rng);
    Mat2 u = chart_sl2(prm);
    Mat2 bi = basis_i(), bj = basis_j(), bk = basis_k();

    Point r1 = evaluate_group(ImmersionId::DiagTotGeo, u);
    CHECK(mat_dist(r1.a, u) == 0.0);
    CHECK(mat_dist(r1.b, u) == 0.0);

    Point r2 = evaluate_group(ImmersionId::BergerSpacelike, u);
    CHECK(mat_dist(r2.b, bi * u * bi) < 1e-14);

    Point r3 = evaluate_group(ImmersionId::BergerTimelike, u);
    CHECK(mat_dist(r3.b, -(bk * u * bk)) < 1e-14);

    Point r4 = evaluate_group(ImmersionId::PslConjugation, u);
    Mat2 ui = u.inverse();
    CHECK(mat_dist(r4.a, bi * u * bi * ui) < 1e-13);
    CHECK(mat_dist(r4.b, bj * u * bj * ui) < 1e-13);

    // Chart route agrees with the group route.
    for (ImmersionId id :
         {ImmersionId::DiagTotGeo, ImmersionId::BergerSpacelike,
          ImmersionId::BergerTimelike, ImmersionId::PslConjugation}) {
      CHECK(point_dist(evaluate(ref_of(id), prm), evaluate_group(id, u)) <
            1e-13);
    }

    // Central isotropy of row 4: u and -u map to the same point.
    Mat2 mu = -1.0 * u;
    CHECK(point_dist(evaluate_group(ImmersionId::PslConjugation, u),
                     evaluate_group(ImmersionId::PslConjugation, mu)) < 1e-12);
  }

  CHECK_THROWS_AS(evaluate_group(ImmersionId::FlatTorus, Mat2::identity()),
                  NotApplicable);
}

TEST_CASE("pushforward: row-4 closed form, including the stated origin "
          "value") {
  // At u: alpha = Ad_u(i X i - X), beta = Ad_u(j X j - X), with X the
  // left-invariant coordinate of the chart tangent.
  RngStream rng(kSeed);
  for (int s = 0; s < 6; ++s) {
    ParamPoint prm = (s == 0) ? ParamPoint{0, 0, 0} : random_param(rng);
    Mat2 u = chart_sl2(prm);
    auto tangents = chart_tangents(prm);
    auto fd = pushforward(kRow4, prm);
    auto cs = pushforward_exact(kRow4, prm);
    for (int d = 0; d < 3; ++d) {
      Mat2 X = tangents[d];
      Mat2 alpha = Ad(u, basis_i() * X * basis_i() - X);
      Mat2 beta = Ad(u, basis_j() * X * basis_j() - X);
      CHECK(mat_dist(fd[d].alpha.mat(), alpha) < 1e-9);
      CHECK(mat_dist(fd[d].beta.mat(), beta) < 1e-9);
      CHECK(mat_dist(cs[d].alpha.mat(), alpha) < 1e-11);
      CHECK(mat_dist(cs[d].beta.mat(), beta) < 1e-11);
    }
  }

  // Origin, first direction: (0, -2i).
  auto at0 = pushforward_exact(kRow4, {0, 0, 0});
  CHECK(coord_norm(at0[0].algebra() -
                   AlgebraVec{Sl2Vec{}, Sl2Vec::from_xyz(-2, 0, 0)}) < 1e-12);
}

TEST_CASE("pushforward: row-5 closed form (-k,-k), (Ad i, 0), (0, Ad j)") {
  RngStream rng(kSeed);
  for (int s = 0; s < 6; ++s) {
    ParamPoint prm = (s == 0) ? ParamPoint{0, 0, 0} : random_param(rng);
    Mat2 euk = exp_sl2(Sl2Vec::from_xyz(0, 0, prm.u));
    Mat2 ado_i = Ad(euk, basis_i());
    Mat2 ado_j = Ad(euk, basis_j());
    auto fd = pushforward(kRow5, prm);
    auto cs = pushforward_exact(kRow5, prm);
    for (auto* pf : {&fd, &cs}) {
      double tol = (pf == &fd) ? 1e-9 : 1e-11;
      CHECK(mat_dist((*pf)[0].alpha.mat(), -basis_k()) < tol);
      CHECK(mat_dist((*pf)[0].beta.mat(), -basis_k()) < tol);
      CHECK(mat_dist((*pf)[1].alpha.mat(), ado_i) < tol);
      CHECK(coord_norm(AlgebraVec{Sl2Vec{}, (*pf)[1].beta}) < tol);
      CHECK(coord_norm(AlgebraVec{(*pf)[2].alpha, Sl2Vec{}}) < tol);
      CHECK(mat_dist((*pf)[2].beta.mat(), ado_j) < tol);
    }
  }
}

TEST_CASE("pushforward: origin tangents of the Bianchi rows equal the "
          "subalgebra action") {
  // d/dt exp(t e).(Id,Id) = (e[0] - e[2], e[1] - e[2]) slotwise, and at the
  // origin every coefficient function equals 1, so the coordinate
  // pushforwards are exactly these differences for the row's basis order.
  auto check_row = [](const ImmersionRef& ref, std::array<int, 3> dir_of_e) {
    SubalgebraSpec spec = subalgebra(ref);
    auto cs = pushforward_exact(ref, {0, 0, 0});
    for (int which = 0; which < 3; ++which) {
      const AlgebraTriple& e = spec.basis[which];
      AlgebraVec expect{e[0] - e[2], e[1] - e[2]};
      int d = dir_of_e[which];
      CHECK(coord_norm(cs[d].algebra() - expect) < 1e-11);
    }
  };
  // Parameter order: row 6 exponent is w e1 + u c e2 + v c e3, row 7 is
  // w e1 + u c e2 + v e3, row 8 is v e1 + u c e2 + w c e3.
  check_row(kRow6, {2, 0, 1});
  check_row(kRow7, {2, 0, 1});
  check_row({ImmersionId::BianchiIII_f_lambda, -1.0}, {2, 0, 1});
  check_row(kRow8, {1, 0, 2});
}

TEST_CASE("pushforward: step halving agreement and complex-step match") {
  RngStream rng(kSeed);
  for (const ImmersionRef& ref : all_refs()) {
    ParamPoint prm = random_param(rng);
    auto a = pushforward(ref, prm, 1e-4);
    auto b = pushforward(ref, prm, 5e-5);
    auto c = pushforward_exact(ref, prm);
    for (int d = 0; d < 3; ++d) {
      CHECK(coord_norm(a[d].algebra() - b[d].algebra()) < 1e-7);
      CHECK(coord_norm(a[d].algebra() - c[d].algebra()) < 1e-9);
    }
  }
}

TEST_CASE("pushforward triples are g-nondegenerate and Lagrangian on rows "
          "4-8") {
  RngStream rng(kSeed);
  for (const ImmersionRef& ref : all_refs()) {
    if (row_number(ref.id) < 4) continue;
    for (int s = 0; s < 10; ++s) {
      ParamPoint prm = random_param(rng);
      auto cs = pushforward_exact(ref, prm);
      Eigen::Matrix3d gram;
      double lag = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          gram(i, j) = metric_g(cs[i].algebra(), cs[j].algebra());
          lag = std::max(lag, std::abs(metric_g(apply_J(cs[i].algebra()),
                                                cs[j].algebra())));
        }
      }
      CHECK(std::abs(gram.determinant()) > 1e-10);
      CHECK(lag < 1e-8);
    }
  }
}

TEST_CASE("row 6: explicit matrix solution reproduces the exponential form") {
  // The explicit solution, in its own coordinates (ue, ve, we):
  //   p = [[E, E(ue + ve/3)], [3 E ve, E(ve^2 + 3 ue ve) + 1/E]],
  //   q = [[1, 2 ve/3], [0, 1]],  E = e^{sqrt(3/2) we},
  // matches the exponential form under (ue, ve, we) =
  // (-(u+v)/2, 3(u-v)/2, 2 sqrt(2/3) w).
  auto explicit_solution = [](double ue, double ve, double we) {
    double E = std::exp(std::sqrt(1.5) * we);
    Mat2 p{E, E * (ue + ve / 3.0), 3.0 * E * ve,
           E * (ve * ve + 3.0 * ue * ve) + 1.0 / E};
    Mat2 q{1.0, 2.0 * ve / 3.0, 0.0, 1.0};
    return std::pair<Mat2, Mat2>(p, q);
  };
  for (ParamPoint prm :
       {ParamPoint{0.3, -0.2, 0.4}, ParamPoint{0.1, 0.2, -0.3},
        ParamPoint{0, 0, 0}, ParamPoint{-0.6, 0.45, 0.2}}) {
    auto [pe, qe] =
        explicit_solution(-0.5 * (prm.u + prm.v), 1.5 * (prm.u - prm.v),
                          2.0 * std::sqrt(2.0 / 3.0) * prm.w);
    Point got = evaluate(kRow6, prm);
    CHECK(mat_dist(got.a, pe) < 1e-12);
    CHECK(mat_dist(got.b, qe) < 1e-12);
  }
}

TEST_CASE("row 7: stated induced metric in the frame (dw, e^{2w} du, dv)") {
  RngStream rng(kSeed);
  for (double lam : lambda_grid()) {
    ImmersionRef ref{ImmersionId::BianchiIII_f_lambda, lam};
    for (int s = 0; s < 5; ++s) {
      ParamPoint prm = random_param(rng);
      auto cs = pushforward_exact(ref, prm);
      AlgebraVec fu = std::exp(2.0 * prm.w) * cs[0].algebra();
      AlgebraVec fv = cs[1].algebra();
      AlgebraVec fw = cs[2].algebra();
      CHECK(metric_g(fw, fw) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
      CHECK(std::abs(metric_g(fu, fu)) < 1e-9);
      CHECK(metric_g(fu, fv) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(metric_g(fv, fv) ==
            doctest::Approx(2.0 * (lam - 1.0) / 3.0).epsilon(1e-9));
      CHECK(std::abs(metric_g(fw, fu)) < 1e-9);
      CHECK(std::abs(metric_g(fw, fv)) < 1e-9);
    }
  }
}

TEST_CASE("frozen pushforward Gram anchors, rows 6-8") {
  auto gram_of = [](const ImmersionRef& ref, const ParamPoint& prm) {
    auto cs = pushforward_exact(ref, prm);
    std::array<double, 6> out{};
    int n = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j)
        out[n++] = metric_g(cs[i].algebra(), cs[j].algebra());
    return out;  // order: (0,0),(0,1),(0,2),(1,1),(1,2),(2,2)
  };
  auto expect = [](const std::array<double, 6>& got,
                   const std::array<double, 6>& want) {
    for (int i = 0; i < 6; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9).scale(1.0));
  };
  expect(gram_of(kRow6, {0.1, -0.2, 0.15}),
         {-2.73317820057, 0.0, 0.0, 2.7331782006, 0.0, 8.0 / 3.0});
  expect(gram_of(kRow7, {0.12, -0.23, 0.31}),
         {0.0, 0.537944437595, 0.0, 2.0 / 3.0, 0.0, 2.0 / 3.0});
  expect(gram_of(kRow8, {0.1, 0.2, -0.15}),
         {0.0, 2.98364939533, 7.97816940778, 0.0, 1.5598120082,
          9.53344065479});
}

TEST_CASE("Bianchi subalgebras: stated brackets hold to 1e-12") {
  for (const ImmersionRef& ref : {kRow6, kRow7, kRow8}) {
    CHECK(subalgebra_bracket_residual(subalgebra(ref)) < 1e-12);
  }
  for (double lam : lambda_grid()) {
    CHECK(subalgebra_bracket_residual(
              subalgebra({ImmersionId::BianchiIII_f_lambda, lam})) < 1e-12);
  }

  // Structure constants as printed: row 6 (-2e2, -2e3, 0), row 7 (2e2, 0, 0),
  // row 8 (-2e2, e3, 0).
  SubalgebraSpec s6 = subalgebra(kRow6);
  CHECK(s6.expected[0] == std::array<double, 3>{0, -2, 0});
  CHECK(s6.expected[1] == std::array<double, 3>{0, 0, -2});
  CHECK(s6.expected[2] == std::array<double, 3>{0, 0, 0});
  SubalgebraSpec s7 = subalgebra(kRow7);
  CHECK(s7.expected[0] == std::array<double, 3>{0, 2, 0});
  CHECK(s7.expected[1] == std::array<double, 3>{0, 0, 0});
  SubalgebraSpec s8 = subalgebra(kRow8);
  CHECK(s8.expected[0] == std::array<double, 3>{0, -2, 0});
  CHECK(s8.expected[1] == std::array<double, 3>{0, 0, 1});

  // Spot-check a printed basis entry: row 6 e2 = (9/4 (j-k), (j+k)/2, 0).
  auto e2 = s6.basis[1];
  CHECK(mat_dist(e2[0].mat(), 2.25 * (basis_j() - basis_k())) < 1e-15);
  CHECK(mat_dist(e2[1].mat(), 0.5 * (basis_j() + basis_k())) < 1e-15);
  CHECK(coord_norm(AlgebraVec{e2[2], Sl2Vec{}}) == 0.0);

  for (ImmersionId id :
       {ImmersionId::DiagTotGeo, ImmersionId::BergerSpacelike,
        ImmersionId::BergerTimelike, ImmersionId::PslConjugation,
        ImmersionId::FlatTorus}) {
    CHECK_THROWS_AS(subalgebra(ref_of(id)), NotApplicable);
  }
}

TEST_CASE("removable singular coefficients are continuous") {
  // Crossing the series branch of the coefficient functions must not move the
  // value beyond the first-order Taylor term: compare f(center + h e_d)
  // against f(center) + h df, with df the complex-step derivative evaluated
  // exactly at the singular locus. The residual is O(h^2); a jump, a wrong
  // limit value, or a NaN at the locus would dominate it.
  struct Probe {
    ImmersionRef ref;
    ParamPoint center;
    int dir;  // index of the coordinate whose coefficient degenerates
  };
  const std::array<Probe, 3> probes = {
      Probe{kRow6, {0.3, -0.2, 0.0}, 2},
      Probe{kRow7, {0.3, -0.2, 0.0}, 2},
      Probe{kRow8, {0.3, 0.0, -0.2}, 1},
  };
  for (const Probe& pb : probes) {
    CAPTURE(row_number(pb.ref.id));
    Point at0 = evaluate(pb.ref, pb.center);
    auto tans = pushforward_exact(pb.ref, pb.center);
    Mat2 dp = at0.a * tans[pb.dir].alpha.mat();
    Mat2 dq = at0.b * tans[pb.dir].beta.mat();
    for (double h : {1e-6, -1e-6, 1e-9}) {
      std::array<double, 3> a = pb.center.arr();
      a[pb.dir] += h;
      Point moved = evaluate(pb.ref, ParamPoint::from_arr(a));
      CHECK(mat_dist(moved.a, at0.a + h * dp) < 1e-9);
      CHECK(mat_dist(moved.b, at0.b + h * dq) < 1e-9);
    }
  }
}

TEST_CASE("expected profiles match the classification table") {
  ExpectedProfile p1 = expected_profile(kRow1);
  CHECK(p1.tot_geodesic);
  REQUIRE(p1.K.has_value());
  CHECK(*p1.K == doctest::Approx(-1.5));

  for (const ImmersionRef& r : {kRow2, kRow3}) {
    ExpectedProfile p = expected_profile(r);
    CHECK(p.tot_geodesic);
    CHECK(!p.K.has_value());
  }

  ExpectedProfile p4 = expected_profile(kRow4);
  CHECK(p4.lag_type == LagType::I);
  CHECK(*p4.K == doctest::Approx(-3.0 / 8.0));
  REQUIRE(p4.angles.size() == 3);
  CHECK(p4.angles[0] == doctest::Approx(0.0));
  CHECK(p4.angles[1] == doctest::Approx(kPi / 3));
  CHECK(p4.angles[2] == doctest::Approx(2 * kPi / 3));

  ExpectedProfile p5 = expected_profile(kRow5);
  CHECK(*p5.K == doctest::Approx(0.0));

  // Type I angle sums vanish mod pi.
  for (const ImmersionRef& r : {kRow1, kRow2, kRow3, kRow4, kRow5}) {
    ExpectedProfile p = expected_profile(r);
    double s = 0.0;
    for (double th : p.angles) s += th;
    CHECK(std::abs(std::remainder(s, kPi)) < 1e-12);
  }

  auto constant = [](const ExpectedProfile& p, const std::string& name) {
    for (const auto& [k, v] : p.constants)
      if (k == name) return v;
    REQUIRE(false);
    return 0.0;
  };

  CHECK(constant(p4, "h12^3") == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));
  CHECK(constant(p5, "h12^3") == doctest::Approx(-1.0 / std::sqrt(2.0)));

  ExpectedProfile p6 = expected_profile(kRow6);
  CHECK(p6.lag_type == LagType::II);
  CHECK(p6.delta_tag == 2);
  CHECK(*p6.K == doctest::Approx(-1.5));
  CHECK(constant(p6, "h22^3") == doctest::Approx(-std::sqrt(2.0) / 3.0));
  CHECK(constant(p6, "w12^3") == doctest::Approx(-std::sqrt(1.5)));
  CHECK(constant(p6, "w31^1") == doctest::Approx(0.0));

  for (double lam : lambda_grid()) {
    ExpectedProfile p7 =
        expected_profile({ImmersionId::BianchiIII_f_lambda, lam});
    CHECK(constant(p7, "h22^3") == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0));
    CHECK(constant(p7, "w22^3") ==
          doctest::Approx(std::sqrt(2.0 / 3.0) * (1.0 - lam)));
    CHECK(constant(p7, "w33^2") == doctest::Approx(0.0));
    CHECK(constant(p7, "w31^1") == doctest::Approx(std::sqrt(1.5)));
  }

  ExpectedProfile p8 = expected_profile(kRow8);
  CHECK(p8.lag_type == LagType::III);
  CHECK(!p8.K.has_value());
  REQUIRE(p8.b_sign.has_value());
  CHECK(*p8.b_sign == -1);
  CHECK(constant(p8, "h22^2") == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0));
  CHECK(constant(p8, "h22^1") ==
        doctest::Approx(-13.0 / (18.0 * std::sqrt(2.0))));
  CHECK(constant(p8, "h22^3") == doctest::Approx(5.0 * std::sqrt(2.0) / 9.0));
}

TEST_CASE("complex-instantiated evaluation matches the real path") {
  using C = std::complex<double>;
  for (const ImmersionRef& ref : all_refs()) {
    ParamPoint prm{0.21, -0.34, 0.12};
    Point re = evaluate(ref, prm);
    MatPairT<C> ce = evaluate_t<C>(ref, C(prm.u), C(prm.v), C(prm.w));
    CHECK(mat_dist(real_part(ce.p), re.a) < 1e-14);
    CHECK(mat_dist(real_part(ce.q), re.b) < 1e-14);
    CHECK(max_abs(imag_part(ce.p)) == 0.0);

    // Complex step along u reproduces the finite difference.
    double h = 1e-100, d = 1e-5;
    MatPairT<C> pert = evaluate_t<C>(ref, C(prm.u, h), C(prm.v), C(prm.w));
    Mat2 der = (1.0 / h) * imag_part(pert.p);
    Point lo = evaluate(ref, {prm.u - d, prm.v, prm.w});
    Point hi = evaluate(ref, {prm.u + d, prm.v, prm.w});
    Mat2 fd = (1.0 / (2.0 * d)) * (hi.a - lo.a);
    CHECK(mat_dist(der, fd) < 1e-8);
  }
}

TEST_CASE("domain guards") {
  CHECK_THROWS_AS(
      evaluate(kRow5, {std::numeric_limits<double>::quiet_NaN(), 0, 0}),
      DomainError);
  CHECK_THROWS_AS(evaluate(kRow6, {1e7, 0, 0}), DomainError);
}

TEST_CASE("random_param: deterministic and inside the box") {
  RngStream a(kSeed), b(kSeed);
  for (int s = 0; s < 10; ++s) {
    ParamPoint pa = random_param(a), pb = random_param(b);
    CHECK(pa.u == pb.u);
    CHECK(pa.v == pb.v);
    CHECK(pa.w == pb.w);
    for (double x : pa.arr()) {
      CHECK(x >= -kDomainHalfWidth);
      CHECK(x <= kDomainHalfWidth);
    }
  }
}
