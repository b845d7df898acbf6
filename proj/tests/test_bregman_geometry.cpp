#include <cmath>
#include <random>

#include "doctest.h"
#include "dlsp/geometry.hpp"

using namespace dlsp;

namespace {

const Geometry kEuc{GeometryKind::Euclidean};
const Geometry kEnt{GeometryKind::EntropySimplex};

Vec random_simplex(Index n, std::mt19937_64& g) {
  std::exponential_distribution<double> e;
  Vec y(n);
  for (Index i = 0; i < n; ++i) y[i] = e(g) + 1e-3;
  return y / y.sum();
}

Vec random_normal(Index n, std::mt19937_64& g, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(g);
  return v;
}

// Entropic prox over the simplex by bisection on the normalization multiplier:
// u_i(lam) = z_i exp(-(a g_i + lam)/c - 1), with sum_i u_i(lam) = 1.
Vec entropy_prox_oracle(const Vec& z, const Vec& g, double a, double c) {
  auto mass = [&](double lam) {
    return (z.array() * (-(a * g.array() + lam) / c - 1.0).exp()).sum();
  };
  double lo = -1e3, hi = 1e3;  // mass is decreasing in lam
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  double lam = 0.5 * (lo + hi);
  return (z.array() * (-(a * g.array() + lam) / c - 1.0).exp()).matrix();
}

AnchorSet random_anchors(const Geometry& geom, Index n, int r, std::mt19937_64& g, bool simplex) {
  AnchorSet s(geom);
  std::exponential_distribution<double> e;
  std::vector<double> w(static_cast<size_t>(r));
  double tot = 0;
  for (auto& x : w) tot += (x = e(g));
  for (int i = 0; i < r; ++i)
    s.add(simplex ? random_simplex(n, g) : random_normal(n, g), w[static_cast<size_t>(i)] / tot);
  return s;
}

}  // namespace

TEST_CASE("divergence examples") {
  CHECK(divergence(kEuc, Vec::Unit(2, 0), Vec::Zero(2)) == doctest::Approx(0.5));
  Vec half = Vec::Constant(2, 0.5);
  CHECK(divergence(kEnt, half, half) == doctest::Approx(0.0));
  CHECK(divergence(kEnt, Vec::Unit(2, 0), half) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("divergences are one-strongly convex in their norms") {
  std::mt19937_64 g(1);
  for (int t = 0; t < 500; ++t) {
    Vec u = random_normal(6, g), z = random_normal(6, g);
    CHECK(divergence(kEuc, u, z) >= 0.5 * (u - z).squaredNorm() - 1e-12);
    CHECK(divergence(kEuc, z, z) == 0.0);
    Vec p = random_simplex(6, g), q = random_simplex(6, g);
    double l1 = (p - q).lpNorm<1>();
    CHECK(divergence(kEnt, p, q) >= 0.5 * l1 * l1 - 1e-12);
    CHECK(divergence(kEnt, q, q) == doctest::Approx(0.0));
  }
}

TEST_CASE("prox closed-form examples") {
  std::mt19937_64 g(2);
  AnchorSet s(kEuc);
  Vec z1 = random_normal(3, g), z2 = random_normal(3, g);
  s.add(z1, 0.25);
  s.add(z2, 0.75);
  for (double c : {0.1, 1.0, 7.0}) {
    Vec u = prox_multi(kEuc, Domain::full(), Vec::Zero(3), 1.0, ProxFunction::zero(), c, s);
    CHECK((u - (0.25 * z1 + 0.75 * z2)).norm() < 1e-12);
  }

  AnchorSet one(kEuc);
  Vec z = random_normal(3, g);
  one.add(z, 1.0);
  Vec u = prox_multi(kEuc, Domain::full(), Vec::Unit(3, 0), 1.0, ProxFunction::zero(), 1.0, one);
  // The stiffness weighs half the divergence, so the step is 2a/c.
  CHECK((u - (z - 2.0 * Vec::Unit(3, 0))).norm() < 1e-12);
  Vec u2 = prox_multi(kEuc, Domain::full(), Vec::Unit(3, 0), 1.0, ProxFunction::zero(), 2.0, one);
  CHECK((u2 - (z - Vec::Unit(3, 0))).norm() < 1e-12);

  AnchorSet uni(kEnt);
  uni.add(Vec::Constant(4, 0.25), 1.0);
  Vec v = prox_multi(kEnt, Domain::simplex(), Vec::Zero(4), 1.0, ProxFunction::zero(), 1.0, uni);
  CHECK((v - Vec::Constant(4, 0.25)).norm() < 1e-14);
}

TEST_CASE("entropy prox agrees with a multiplier bisection oracle") {
  AnchorSet half(kEnt);
  Vec z = Vec::Constant(2, 0.5);
  half.add(z, 1.0);
  Vec gvec(2);
  gvec << -std::log(2.0), 0.0;
  // The stiffness enters as c/2 times the divergence, so the oracle sees c/2.
  Vec u = prox_multi(kEnt, Domain::simplex(), gvec, 1.0, ProxFunction::zero(), 1.0, half);
  Vec o = entropy_prox_oracle(z, gvec, 1.0, 0.5);
  CHECK((u - o).norm() < 1e-10);
  CHECK(u[0] == doctest::Approx(0.8));  // exp(2 log 2) : 1 = 4 : 1

  std::mt19937_64 g(3);
  for (int t = 0; t < 50; ++t) {
    Vec zz = random_simplex(7, g), gg = random_normal(7, g, 3.0);
    AnchorSet s(kEnt);
    s.add(zz, 1.0);
    Vec a = prox_multi(kEnt, Domain::simplex(), gg, 0.7, ProxFunction::zero(), 1.3, s);
    CHECK((a - entropy_prox_oracle(zz, gg, 0.7, 0.65)).norm() < 1e-9);
  }
}

TEST_CASE("entropy prox stays positive and finite under extreme inputs") {
  AnchorSet s(kEnt);
  s.add(Vec::Constant(3, 1.0 / 3), 1.0);
  Vec gvec(3);
  gvec << 1e6, -1e6, 0.0;
  Vec u = prox_multi(kEnt, Domain::simplex(), gvec, 1.0, ProxFunction::zero(), 1e-3, s);
  CHECK(u.allFinite());
  CHECK((u.array() > 0).all());
  CHECK(u.sum() == doctest::Approx(1.0));
  CHECK(u[1] == doctest::Approx(1.0));
}

TEST_CASE("three-point property") {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 5;
    const double a = unif(g), c = unif(g), m = unif(g);
    const Vec gvec = random_normal(n, g);

    {  // euclidean on a box with a quadratic term
      Domain box = Domain::box(n, -0.5, 0.5);
      AnchorSet anchors = random_anchors(kEuc, n, 3, g, false);
      ProxFunction h = ProxFunction::quadratic(m, random_normal(n, g));
      Vec zp = prox_multi(kEuc, box, gvec, a, h, c, anchors);
      double base = prox_objective(kEuc, zp, gvec, a, h, c, anchors);
      std::uniform_real_distribution<double> ub(-0.5, 0.5);
      for (int t = 0; t < 100; ++t) {
        Vec u(n);
        for (Index i = 0; i < n; ++i) u[i] = ub(g);
        double lhs = prox_objective(kEuc, u, gvec, a, h, c, anchors);
        CHECK(lhs - base - (0.5 * c + a * m) * divergence(kEuc, u, zp) >= -1e-8);
      }
    }
    {  // entropy on the simplex with a relative-entropy term
      AnchorSet anchors = random_anchors(kEnt, n, 4, g, true);
      ProxFunction h = ProxFunction::entropic(m, random_simplex(n, g));
      Vec zp = prox_multi(kEnt, Domain::simplex(), gvec, a, h, c, anchors);
      double base = prox_objective(kEnt, zp, gvec, a, h, c, anchors);
      for (int t = 0; t < 100; ++t) {
        Vec u = random_simplex(n, g);
        double lhs = prox_objective(kEnt, u, gvec, a, h, c, anchors);
        CHECK(lhs - base - (0.5 * c + a * m) * divergence(kEnt, u, zp) >= -1e-8);
      }
    }
  }
}

TEST_CASE("multi-anchor prox equals a single synthetic anchor") {
  std::mt19937_64 g(5);
  for (int t = 0; t < 30; ++t) {
    const Index n = 6;
    Vec gvec = random_normal(n, g);
    {
      AnchorSet s = random_anchors(kEuc, n, 5, g, false);
      CHECK((s.aggregate() - s.recompute()).norm() <= 1e-10);
      AnchorSet single(kEuc);
      single.add(s.aggregate(), 1.0);
      Vec u1 = prox_multi(kEuc, Domain::orthant(), gvec, 0.8, ProxFunction::quadratic(0.3), 1.1, s);
      Vec u2 = prox_multi(kEuc, Domain::orthant(), gvec, 0.8, ProxFunction::quadratic(0.3), 1.1, single);
      CHECK((u1 - u2).norm() <= 1e-10);
    }
    {
      AnchorSet s = random_anchors(kEnt, n, 5, g, true);
      CHECK((s.aggregate() - s.recompute()).norm() <= 1e-10);
      AnchorSet single(kEnt);
      single.add(s.aggregate().array().exp().matrix(), 1.0);  // not normalized; only the log enters
      auto h = ProxFunction::entropic(0.4, Vec::Constant(n, 1.0 / n));
      Vec u1 = prox_multi(kEnt, Domain::simplex(), gvec, 0.8, h, 1.1, s);
      Vec u2 = prox_multi(kEnt, Domain::simplex(), gvec, 0.8, h, 1.1, single);
      CHECK((u1 - u2).norm() <= 1e-10);
    }
  }
}

TEST_CASE("first-order optimality against feasible directions") {
  std::mt19937_64 g(6);
  const Index n = 6;
  for (int t = 0; t < 30; ++t) {
    Vec gvec = random_normal(n, g, 2.0);
    const double a = 0.9, c = 0.6, m = 0.5;
    {
      Domain box = Domain::box(n, -0.3, 0.4);
      AnchorSet s = random_anchors(kEuc, n, 3, g, false);
      Vec ctr = random_normal(n, g);
      Vec u = prox_multi(kEuc, box, gvec, a, ProxFunction::quadratic(m, ctr), c, s);
      Vec grad = a * gvec + a * m * (u - ctr);
      for (const auto& [z, w] : s.anchors()) grad += 0.5 * c * w * (u - z);
      // Vertices of the box are the extreme feasible directions.
      for (Index i = 0; i < n; ++i) {
        double lo_dir = grad[i] * (-0.3 - u[i]), hi_dir = grad[i] * (0.4 - u[i]);
        CHECK(lo_dir >= -1e-8);
        CHECK(hi_dir >= -1e-8);
      }
    }
    {
      AnchorSet s = random_anchors(kEnt, n, 3, g, true);
      Vec ctr = random_simplex(n, g);
      Vec u = prox_multi(kEnt, Domain::simplex(), gvec, a, ProxFunction::entropic(m, ctr), c, s);
      Vec grad = a * gvec + a * m * (u.array() / ctr.array()).log().matrix();
      for (const auto& [z, w] : s.anchors()) grad += 0.5 * c * w * (u.array() / z.array()).log().matrix();
      for (Index j = 0; j < n; ++j) CHECK(grad.dot(Vec::Unit(n, j) - u) >= -1e-8);
    }
    {
      Domain bs = Domain::block_simplex({{0, 1, 2}, {3, 4, 5}});
      AnchorSet s(kEuc);
      s.add(random_normal(n, g), 1.0);
      Vec u = prox_multi(kEuc, bs, gvec, a, ProxFunction::zero(), c, s);
      Vec grad = a * gvec + 0.5 * c * (u - s.anchors()[0].first);
      for (Index j = 0; j < 3; ++j)
        for (Index k = 3; k < 6; ++k) {
          Vec v = Vec::Unit(n, j) + Vec::Unit(n, k);
          CHECK(grad.dot(v - u) >= -1e-8);
        }
    }
  }
}

TEST_CASE("simplex projection matches the KKT characterization") {
  std::mt19937_64 g(7);
  for (int t = 0; t < 200; ++t) {
    Vec v = random_normal(8, g, 2.0);
    Vec p = project_simplex(v);
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK((p.array() >= 0).all());
    // Positive entries share the shift tau; zero entries sit below it.
    double tau = 0;
    int cnt = 0;
    for (Index i = 0; i < 8; ++i)
      if (p[i] > 0) { tau += v[i] - p[i]; ++cnt; }
    tau /= cnt;
    for (Index i = 0; i < 8; ++i) {
      if (p[i] > 0) CHECK(v[i] - p[i] == doctest::Approx(tau));
      else CHECK(v[i] <= tau + 1e-12);
    }
  }
}

TEST_CASE("prox errors") {
  AnchorSet s(kEuc);
  s.add(Vec::Zero(2), 1.0);
  CHECK_THROWS_AS(prox_multi(kEuc, Domain::full(), Vec::Zero(2), 1, ProxFunction::zero(), 0.0, s), DomainError);
  CHECK_THROWS_AS(prox_multi(kEuc, Domain::full(), Vec::Zero(2), 1, ProxFunction::entropic(1, Vec::Ones(2)), 1, s),
                  ProxUnsupported);
  AnchorSet e(kEnt);
  e.add(Vec::Constant(2, 0.5), 1.0);
  CHECK_THROWS_AS(prox_multi(kEnt, Domain::simplex(), Vec::Zero(2), 1, ProxFunction::quadratic(1), 1, e),
                  ProxUnsupported);
  CHECK_THROWS_AS(prox_multi(kEnt, Domain::box(2, 0, 1), Vec::Zero(2), 1, ProxFunction::zero(), 1, e),
                  ProxUnsupported);
  AnchorSet bad(kEuc);
  bad.add(Vec::Zero(2), 0.5);
  CHECK_THROWS_AS(prox_multi(kEuc, Domain::full(), Vec::Zero(2), 1, ProxFunction::zero(), 1, bad), DomainError);
}
