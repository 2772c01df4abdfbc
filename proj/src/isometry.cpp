// Isometry group: actions, differentials, composition with pointwise
// canonicalisation, and the equivariance verifier.

#include "nklab/isometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace nklab {

namespace {

// Slot shuffles of the triple presentation for the six permutation
// isometries, in Perm::index() order (0..5):
//   (0,0) id         (0,1) (A,B,C)->(C,A,B)   (0,2) (A,B,C)->(B,C,A)
//   (1,0) (B,A,C)    (1,1) (A,C,B)            (1,2) (C,B,A)
constexpr std::array<std::array<int, 3>, 6> kShuffles = {{
    {0, 1, 2}, {2, 0, 1}, {1, 2, 0}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}}};

int shuffle_to_index(const std::array<int, 3>& s) {
  for (int i = 0; i < 6; ++i) {
    if (kShuffles[i] == s) return i;
  }
  throw Error("internal: unknown shuffle");
}

Perm perm_from_index(int idx) { return Perm{idx / 3, idx % 3}; }

Mat2 z2_factor(int k) { return k ? basis_i() : Mat2::identity(); }

// Permutation action on a pair, in left-translated form (no (a,b,c) part).
template <class T>
std::pair<Mat2T<T>, Mat2T<T>> psi_apply(const Perm& perm, const Mat2T<T>& p,
                                        const Mat2T<T>& q) {
  switch (perm.index()) {
    case 0: return {p, q};
    case 1: return {q.inverse(), p * q.inverse()};
    case 2: return {q * p.inverse(), p.inverse()};
    case 3: return {q, p};
    case 4: return {p * q.inverse(), q.inverse()};
    default: return {p.inverse(), q * p.inverse()};
  }
}

Sl2Vec ad(const Mat2& g, const Sl2Vec& v) {
  return Sl2Vec::unchecked(g * v.mat() * g.inverse());
}

}  // namespace

std::array<int, 3> perm_shuffle(const Perm& p) { return kShuffles[p.index()]; }

Perm perm_compose(const Perm& f, const Perm& g) {
  const auto& sf = kShuffles[f.index()];
  const auto& sg = kShuffles[g.index()];
  std::array<int, 3> s;
  for (int i = 0; i < 3; ++i) s[i] = sg[sf[i]];
  return perm_from_index(shuffle_to_index(s));
}

Perm perm_inverse(const Perm& p) {
  const auto& s = kShuffles[p.index()];
  std::array<int, 3> inv{};
  for (int i = 0; i < 3; ++i) inv[s[i]] = i;
  return perm_from_index(shuffle_to_index(inv));
}

Isometry::Isometry(const Mat2& ma, const Mat2& mb, const Mat2& mc, int kk,
                   Perm p)
    : a(ma), b(mb), c(mc), k(kk), perm(p) {
  for (const Mat2* m : {&a, &b, &c}) {
    if (std::abs(m->det() - 1.0) > default_tol().det_tol) {
      throw InvalidInput("Isometry: factor determinant " +
                         std::to_string(m->det()) + " is not 1");
    }
  }
  if (k != 0 && k != 1) throw InvalidInput("Isometry: k must be 0 or 1");
}

template <class T>
std::pair<Mat2T<T>, Mat2T<T>> act_pair(const Isometry& f, const Mat2T<T>& p,
                                       const Mat2T<T>& q) {
  Mat2 af = z2_factor(f.k) * f.a;
  Mat2 bf = z2_factor(f.k) * f.b;
  Mat2 cf = z2_factor(f.k) * f.c;
  auto lift = [](const Mat2& m) {
    return Mat2T<T>{T(m.m00), T(m.m01), T(m.m10), T(m.m11)};
  };
  Mat2T<T> ci = lift(cf).inverse();
  Mat2T<T> p1 = lift(af) * p * ci;
  Mat2T<T> q1 = lift(bf) * q * ci;
  return psi_apply(f.perm, p1, q1);
}

template std::pair<Mat2T<double>, Mat2T<double>> act_pair<double>(
    const Isometry&, const Mat2T<double>&, const Mat2T<double>&);
template std::pair<Mat2T<std::complex<double>>, Mat2T<std::complex<double>>>
act_pair<std::complex<double>>(const Isometry&,
                               const Mat2T<std::complex<double>>&,
                               const Mat2T<std::complex<double>>&);

Point act(const Isometry& f, const Point& pt) {
  auto [p, q] = act_pair<double>(f, pt.a, pt.b);
  return Point(p, q);
}

TangentVec differential(const Isometry& f, const TangentVec& x,
                        double fd_step) {
  // Inner-translation part, exact: left coords conjugate by the c factor.
  Mat2 cf = z2_factor(f.k) * f.c;
  Mat2 af = z2_factor(f.k) * f.a;
  Mat2 bf = z2_factor(f.k) * f.b;
  Mat2 p1 = af * x.base.a * cf.inverse();
  Mat2 q1 = bf * x.base.b * cf.inverse();
  Sl2Vec xi = ad(cf, x.alpha);
  Sl2Vec eta = ad(cf, x.beta);

  if (f.perm.index() == 0) {
    return {Point(p1, q1), xi, eta};
  }

  // Permutation part by central differences along the exponential curve.
  const double h = fd_step;
  auto at = [&](double t) {
    Mat2 pt = p1 * exp_sl2(Sl2Vec::unchecked(t * xi.mat()));
    Mat2 qt = q1 * exp_sl2(Sl2Vec::unchecked(t * eta.mat()));
    return psi_apply(f.perm, pt, qt);
  };
  auto plus = at(h);
  auto minus = at(-h);
  Mat2 d1 = (1.0 / (2.0 * h)) * (plus.first - minus.first);
  Mat2 d2 = (1.0 / (2.0 * h)) * (plus.second - minus.second);
  auto target = psi_apply(f.perm, p1, q1);
  // Left coordinates at the image point; the symmetrisation strips the
  // O(h^2) normal contamination of the difference quotient.
  Sl2Vec z1 = Sl2Vec::unchecked(target.first.inverse() * d1);
  Sl2Vec z2 = Sl2Vec::unchecked(target.second.inverse() * d2);
  return {Point(target.first, target.second), z1, z2};
}

TangentVec differential_closed(const Isometry& f, const TangentVec& x) {
  Mat2 cf = z2_factor(f.k) * f.c;
  Mat2 af = z2_factor(f.k) * f.a;
  Mat2 bf = z2_factor(f.k) * f.b;
  Mat2 p = af * x.base.a * cf.inverse();
  Mat2 q = bf * x.base.b * cf.inverse();
  Sl2Vec xi = ad(cf, x.alpha);
  Sl2Vec eta = ad(cf, x.beta);

  auto target = psi_apply(f.perm, p, q);
  Point base(target.first, target.second);
  switch (f.perm.index()) {
    case 0: return {base, xi, eta};
    case 1: return {base, ad(q, -eta), ad(q, xi - eta)};
    case 2: return {base, ad(p, eta - xi), ad(p, -xi)};
    case 3: return {base, eta, xi};
    case 4: return {base, ad(q, xi - eta), ad(q, -eta)};
    default: return {base, ad(p, -xi), ad(p, eta - xi)};
  }
}

namespace {

const std::array<Point, 8>& probe_points() {
  static const std::array<Point, 8> probes = [] {
    auto e = [](double x, double y, double z) {
      return exp_sl2(Sl2Vec::from_xyz(x, y, z));
    };
    return std::array<Point, 8>{
        Point(Mat2::identity(), Mat2::identity()),
        Point(e(0.3, 0, 0), Mat2::identity()),
        Point(Mat2::identity(), e(0, 0.25, 0)),
        Point(e(0, 0, 0.2), e(0.1, 0, 0)),
        Point(e(0.15, 0.1, 0.05), e(-0.2, 0.05, 0.1)),
        Point(e(-0.1, 0.2, -0.15), e(0.05, -0.1, 0.25)),
        Point(e(0.25, -0.05, 0.1), e(-0.15, 0.2, -0.05)),
        Point(e(-0.2, -0.1, 0.3), e(0.3, 0.1, -0.2)),
    };
  }();
  return probes;
}

double point_dist(const Point& x, const Point& y) {
  return std::max(max_abs(x.a - y.a), max_abs(x.b - y.b));
}

// Solve a p = w1 c, b q = w2 c over the probe set for (a, b, c) up to scale;
// returns false if the linear system has no clean one-dimensional kernel.
bool solve_translation(const std::array<Point, 8>& probes,
                       const std::array<Point, 8>& images, Mat2& a, Mat2& b,
                       Mat2& c) {
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(64, 12);
  int row = 0;
  for (int n = 0; n < 8; ++n) {
    const Mat2& p = probes[n].a;
    const Mat2& q = probes[n].b;
    const Mat2& w1 = images[n].a;
    const Mat2& w2 = images[n].b;
    double pe[2][2] = {{p.m00, p.m01}, {p.m10, p.m11}};
    double qe[2][2] = {{q.m00, q.m01}, {q.m10, q.m11}};
    double w1e[2][2] = {{w1.m00, w1.m01}, {w1.m10, w1.m11}};
    double w2e[2][2] = {{w2.m00, w2.m01}, {w2.m10, w2.m11}};
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) {
        // (a p)_{rs} - (w1 c)_{rs} = 0 ; unknowns [vec a | vec b | vec c].
        for (int t = 0; t < 2; ++t) {
          sys(row, 2 * r + t) += pe[t][s];
          sys(row, 8 + 2 * t + s) -= w1e[r][t];
        }
        ++row;
        for (int t = 0; t < 2; ++t) {
          sys(row, 4 + 2 * r + t) += qe[t][s];
          sys(row, 8 + 2 * t + s) -= w2e[r][t];
        }
        ++row;
      }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double scale = sv(0);
  if (sv(11) > 1e-7 * scale || sv(10) < 1e-6 * scale) return false;
  Eigen::VectorXd u = svd.matrixV().col(11);
  a = Mat2{u(0), u(1), u(2), u(3)};
  b = Mat2{u(4), u(5), u(6), u(7)};
  c = Mat2{u(8), u(9), u(10), u(11)};
  return true;
}

void canonical_sign(Mat2& a, Mat2& b, Mat2& c) {
  double entries[4] = {a.m00, a.m01, a.m10, a.m11};
  for (double e : entries) {
    if (std::abs(e) > 1e-9) {
      if (e < 0.0) {
        a *= -1.0;
        b *= -1.0;
        c *= -1.0;
      }
      return;
    }
  }
}

}  // namespace

Isometry compose(const Isometry& f, const Isometry& g, double tol) {
  const auto& probes = probe_points();
  std::array<Point, 8> images;
  for (int n = 0; n < 8; ++n) images[n] = act(f, act(g, probes[n]));

  // The permutation part composes exactly in S3; try it first, then the
  // rest as a safety net.
  std::array<Perm, 6> order;
  order[0] = perm_compose(f.perm, g.perm);
  int pos = 1;
  for (const Perm& p : all_perms()) {
    if (!(p == order[0])) order[pos++] = p;
  }

  for (const Perm& cand : order) {
    // Strip the candidate permutation from the sampled action.
    Isometry unperm = Isometry::from_perm(perm_inverse(cand));
    std::array<Point, 8> stripped;
    for (int n = 0; n < 8; ++n) stripped[n] = act(unperm, images[n]);

    Mat2 a, b, c;
    if (!solve_translation(probes, stripped, a, b, c)) continue;

    double dc = c.det();
    if (std::abs(dc) < 1e-10) continue;
    double s = 1.0 / std::sqrt(std::abs(dc));
    a *= s;
    b *= s;
    c *= s;
    // All three determinants must carry the same sign; that sign is the Z2
    // bit.
    double da = a.det(), db = b.det();
    if (da * dc < 0.0 || db * dc < 0.0) continue;
    int k = dc < 0.0 ? 1 : 0;
    if (k == 1) {
      // i is an involution, so stripping the factor is another product.
      a = basis_i() * a;
      b = basis_i() * b;
      c = basis_i() * c;
    }
    canonical_sign(a, b, c);

    Isometry result;
    try {
      result = Isometry(a, b, c, k, cand);
    } catch (const InvalidInput&) {
      continue;
    }
    double worst = 0.0;
    for (int n = 0; n < 8; ++n) {
      worst = std::max(worst, point_dist(act(result, probes[n]), images[n]));
    }
    if (worst < tol) return result;
  }

  throw CompositionError(
      "compose: no canonical representative reproduces the pointwise action");
}

Isometry compose_exact(const Isometry& f, const Isometry& g) {
  std::array<Mat2, 3> uf = {z2_factor(f.k) * f.a, z2_factor(f.k) * f.b,
                            z2_factor(f.k) * f.c};
  std::array<Mat2, 3> ug = {z2_factor(g.k) * g.a, z2_factor(g.k) * g.b,
                            z2_factor(g.k) * g.c};
  // Move f's translation across g's permutation: the slots get shuffled by
  // the inverse of g's shuffle.
  const auto& sg = perm_shuffle(g.perm);
  std::array<int, 3> sginv{};
  for (int i = 0; i < 3; ++i) sginv[sg[i]] = i;
  std::array<Mat2, 3> w;
  for (int i = 0; i < 3; ++i) w[i] = uf[sginv[i]] * ug[i];

  int k = f.k ^ g.k;
  if (k == 1) {
    for (auto& m : w) m = basis_i() * m;
  }
  canonical_sign(w[0], w[1], w[2]);
  return Isometry(w[0], w[1], w[2], k, perm_compose(f.perm, g.perm));
}

IsometryReport verify_isometry(const Isometry& f, RngStream& rng,
                               int samples) {
  IsometryReport rep;
  rep.samples = samples;
  double j_plus = 0.0, j_minus = 0.0;
  std::array<double, 3> p_resid = {0.0, 0.0, 0.0};

  for (int s = 0; s < samples; ++s) {
    Point pt(random_sl2(rng), random_sl2(rng));
    AlgebraVec xv(random_traceless(rng), random_traceless(rng));
    AlgebraVec yv(random_traceless(rng), random_traceless(rng));
    TangentVec x{pt, xv.alpha, xv.beta};
    TangentVec y{pt, yv.alpha, yv.beta};

    TangentVec fx = differential(f, x);
    TangentVec fy = differential(f, y);
    rep.metric_residual = std::max(
        rep.metric_residual,
        std::abs(metric_g(fx.algebra(), fy.algebra()) - metric_g(xv, yv)));

    // J law: J dF = (+/-1) dF J.
    AlgebraVec jfx = apply_J(fx.algebra());
    TangentVec jx{pt, apply_J(xv).alpha, apply_J(xv).beta};
    AlgebraVec fjx = differential(f, jx).algebra();
    j_plus = std::max(j_plus, coord_norm(jfx - fjx));
    j_minus = std::max(j_minus, coord_norm(jfx + fjx));

    // P law: P dF = dF (cos tau P + sin tau J P) for one of the three taus.
    AlgebraVec pfx = apply_P(fx.algebra());
    for (int t = 0; t < 3; ++t) {
      double tau = t * 2.0 * M_PI / 3.0;
      AlgebraVec twisted = std::cos(tau) * apply_P(xv) +
                           std::sin(tau) * apply_J(apply_P(xv));
      TangentVec tw{pt, twisted.alpha, twisted.beta};
      p_resid[t] = std::max(
          p_resid[t], coord_norm(pfx - differential(f, tw).algebra()));
    }
  }

  rep.j_sign = j_plus <= j_minus ? 1 : -1;
  rep.j_residual = std::min(j_plus, j_minus);
  int best = 0;
  for (int t = 1; t < 3; ++t) {
    if (p_resid[t] < p_resid[best]) best = t;
  }
  rep.p_tau_idx = best;
  rep.p_residual = p_resid[best];
  return rep;
}

Isometry random_isometry(RngStream& rng) {
  Mat2 a = random_sl2(rng);
  Mat2 b = random_sl2(rng);
  Mat2 c = random_sl2(rng);
  int k = static_cast<int>(rng.below(2));
  Perm perm = all_perms()[rng.below(6)];
  return Isometry(a, b, c, k, perm);
}

}  // namespace nklab
