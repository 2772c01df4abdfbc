// Structure tensors, connection table, and curvature for the product-group
// geometry.

#include "nklab/nk_core.hpp"

#include <cmath>

namespace nklab {

namespace {

const double kSqrt3 = std::sqrt(3.0);

}  // namespace

Vec6 to_coords(const AlgebraVec& x) {
  auto a = x.alpha.xyz();
  auto b = x.beta.xyz();
  Vec6 v;
  v << a[0], a[1], a[2], b[0], b[1], b[2];
  return v;
}

AlgebraVec from_coords(const Vec6& v) {
  return {Sl2Vec::from_xyz(v(0), v(1), v(2)),
          Sl2Vec::from_xyz(v(3), v(4), v(5))};
}

AlgebraVec basis_vec(int idx) {
  Vec6 v = Vec6::Zero();
  v(idx) = 1.0;
  return from_coords(v);
}

double coord_norm(const AlgebraVec& x) { return to_coords(x).norm(); }

double metric_g(const AlgebraVec& x, const AlgebraVec& y) {
  double aa = minkowski_inner(x.alpha, y.alpha);
  double bb = minkowski_inner(x.beta, y.beta);
  double ba = minkowski_inner(x.beta, y.alpha);
  double ab = minkowski_inner(x.alpha, y.beta);
  return (2.0 / 3.0) * (aa + bb) - (1.0 / 3.0) * (ba + ab);
}

double metric_product(const AlgebraVec& x, const AlgebraVec& y) {
  return minkowski_inner(x.alpha, y.alpha) + minkowski_inner(x.beta, y.beta);
}

AlgebraVec apply_J(const AlgebraVec& x) {
  const Sl2Vec& a = x.alpha;
  const Sl2Vec& b = x.beta;
  return {(1.0 / kSqrt3) * (a - 2.0 * b), (1.0 / kSqrt3) * (2.0 * a - b)};
}

AlgebraVec apply_P(const AlgebraVec& x) { return {x.beta, x.alpha}; }

AlgebraVec apply_Q(const AlgebraVec& x) { return {-x.alpha, x.beta}; }

AlgebraVec bracket(const AlgebraVec& x, const AlgebraVec& y) {
  return {2.0 * cross(x.alpha, y.alpha), 2.0 * cross(x.beta, y.beta)};
}

const StructureConstants& StructureConstants::get() {
  static const StructureConstants table = [] {
    StructureConstants t;
    std::array<AlgebraVec, 6> F;
    for (int i = 0; i < 6; ++i) F[i] = basis_vec(i);

    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        t.gram_g(i, j) = metric_g(F[i], F[j]);
        t.gram_prod(i, j) = metric_product(F[i], F[j]);
        t.j_mat(j, i) = to_coords(apply_J(F[i]))(j);
        t.p_mat(j, i) = to_coords(apply_P(F[i]))(j);
        t.q_mat(j, i) = to_coords(apply_Q(F[i]))(j);
      }
    }

    Eigen::FullPivLU<Mat6> lu(t.gram_g);
    if (!lu.isInvertible()) {
      throw SingularGram("StructureConstants: metric table is singular");
    }

    // Koszul recipe on left-invariant fields; constant-coefficient brackets
    // make all field-derivative terms vanish.
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        Vec6 rhs;
        AlgebraVec br = bracket(F[i], F[j]);
        for (int k = 0; k < 6; ++k) {
          rhs(k) = metric_g(br, F[k]) - metric_g(bracket(F[i], F[k]), F[j]) -
                   metric_g(bracket(F[j], F[k]), F[i]);
        }
        t.koszul[i][j] = lu.solve(0.5 * rhs);
      }
    }
    return t;
  }();
  return table;
}

AlgebraVec koszul_connection(const AlgebraVec& a, const AlgebraVec& b) {
  const StructureConstants& t = StructureConstants::get();
  Vec6 ca = to_coords(a);
  Vec6 cb = to_coords(b);
  Vec6 out = Vec6::Zero();
  for (int i = 0; i < 6; ++i) {
    if (ca(i) == 0.0) continue;
    for (int j = 0; j < 6; ++j) {
      if (cb(j) == 0.0) continue;
      out += ca(i) * cb(j) * t.koszul[i][j];
    }
  }
  return from_coords(out);
}

AlgebraVec tensor_G(const AlgebraVec& x, const AlgebraVec& y) {
  return koszul_connection(x, apply_J(y)) - apply_J(koszul_connection(x, y));
}

AlgebraVec curvature(const AlgebraVec& x, const AlgebraVec& y,
                     const AlgebraVec& z) {
  return koszul_connection(x, koszul_connection(y, z)) -
         koszul_connection(y, koszul_connection(x, z)) -
         koszul_connection(bracket(x, y), z);
}

AlgebraVec curvature_closed_form(const AlgebraVec& u, const AlgebraVec& v,
                                 const AlgebraVec& w) {
  AlgebraVec ju = apply_J(u), jv = apply_J(v);
  AlgebraVec pu = apply_P(u), pv = apply_P(v);
  AlgebraVec jpu = apply_J(pu), jpv = apply_J(pv);

  AlgebraVec first =
      metric_g(v, w) * u - metric_g(u, w) * v;
  AlgebraVec second = metric_g(jv, w) * ju - metric_g(ju, w) * jv -
                      2.0 * metric_g(ju, v) * apply_J(w);
  AlgebraVec third = metric_g(pv, w) * pu - metric_g(pu, w) * pv +
                     metric_g(jpv, w) * jpu - metric_g(jpu, w) * jpv;
  return (-5.0 / 6.0) * first + (-1.0 / 6.0) * second + (-2.0 / 3.0) * third;
}

double sectional_curvature(const AlgebraVec& u, const AlgebraVec& v,
                           double plane_tol) {
  double guu = metric_g(u, u);
  double gvv = metric_g(v, v);
  double guv = metric_g(u, v);
  double denom = guu * gvv - guv * guv;
  if (std::abs(denom) < plane_tol) {
    throw DegeneratePlane("sectional_curvature: plane Gram determinant " +
                          std::to_string(denom) + " is below tolerance");
  }
  return metric_g(curvature(u, v, v), u) / denom;
}

double verify_nabla_P(const AlgebraVec& x, const AlgebraVec& y, double eta) {
  auto P = [eta](const AlgebraVec& z) {
    AlgebraVec pz = apply_P(z);
    if (eta == 0.0) return pz;
    return std::cos(eta) * pz + std::sin(eta) * apply_J(pz);
  };
  AlgebraVec lhs = koszul_connection(x, P(y)) - P(koszul_connection(x, y));
  AlgebraVec rhs = 0.5 * (apply_J(tensor_G(x, P(y))) +
                          apply_J(P(tensor_G(x, y))));
  return coord_norm(lhs - rhs);
}

namespace {

// Flat 8-coordinate picture: a point is the pair of matrices, a tangent
// vector at (a, b) is (a*alpha, b*beta).
struct Flat8 {
  Mat2 first, second;
  Flat8 operator-(const Flat8& o) const {
    return {first - o.first, second - o.second};
  }
  Flat8 operator+(const Flat8& o) const {
    return {first + o.first, second + o.second};
  }
  friend Flat8 operator*(double s, const Flat8& f) {
    return {s * f.first, s * f.second};
  }
  double norm() const {
    return std::sqrt(frobenius(first) * frobenius(first) +
                     frobenius(second) * frobenius(second));
  }
};

Flat8 embed_tangent(const Point& p, const AlgebraVec& z) {
  return {p.a * z.alpha.mat(), p.b * z.beta.mat()};
}

}  // namespace

EmbeddingReport verify_euclidean_embedding(RngStream& rng, int samples,
                                           double fd_step) {
  EmbeddingReport rep;
  rep.samples = samples;
  rep.fd_step = fd_step;
  const double h = fd_step;

  for (int s = 0; s < samples; ++s) {
    Point p(random_sl2(rng), random_sl2(rng));
    AlgebraVec X(random_traceless(rng), random_traceless(rng));
    AlgebraVec Y(random_traceless(rng), random_traceless(rng));

    // Flat derivative of the left-invariant extension of Y along the
    // left-invariant curve of X through p, by central differences.
    auto field_at = [&](double t) {
      Mat2 at = p.a * exp_sl2(Sl2Vec::unchecked(t * X.alpha.mat()));
      Mat2 bt = p.b * exp_sl2(Sl2Vec::unchecked(t * X.beta.mat()));
      return Flat8{at * Y.alpha.mat(), bt * Y.beta.mat()};
    };
    Flat8 dxy = (1.0 / (2.0 * h)) * (field_at(h) - field_at(-h));

    // Product-metric connection expressed through the nearly Kaehler one.
    AlgebraVec nabla_e =
        koszul_connection(X, Y) +
        0.5 * (apply_J(tensor_G(X, apply_P(Y))) +
               apply_J(tensor_G(Y, apply_P(X))));

    // Normal terms: scalar multiples of the position pair (a, b) and its
    // reflected partner (-a, b).
    double c1 = 0.5 * metric_product(X, Y);
    double c2 = 0.5 * metric_product(Y, apply_Q(X));
    Flat8 normal{(c1 - c2) * p.a, (c1 + c2) * p.b};

    Flat8 flat_rhs = embed_tangent(p, nabla_e) + normal;
    rep.max_resid_flat = std::max(rep.max_resid_flat, (dxy - flat_rhs).norm());

    // Tangential projection check: strip the normal component per factor
    // (the normal space at a unimodular matrix m is spanned by m itself, so
    // the tangent part of m*xi is m*traceless(xi)).
    Mat2 xi = p.a.inverse() * dxy.first;
    Mat2 etam = p.b.inverse() * dxy.second;
    double tra = 0.5 * xi.trace();
    double trb = 0.5 * etam.trace();
    Mat2 xi0{xi.m00 - tra, xi.m01, xi.m10, xi.m11 - tra};
    Mat2 eta0{etam.m00 - trb, etam.m01, etam.m10, etam.m11 - trb};
    Flat8 tangent_fd{p.a * xi0, p.b * eta0};
    rep.max_resid_tangent = std::max(
        rep.max_resid_tangent, (tangent_fd - embed_tangent(p, nabla_e)).norm());
  }
  return rep;
}

}  // namespace nklab
