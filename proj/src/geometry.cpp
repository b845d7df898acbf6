#include "dlsp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>

namespace dlsp {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

double xlogx(double u) { return u > 0 ? u * std::log(u) : 0.0; }

// Normalized exp(s) over the given coordinates, shifted by the max for safety.
void softmax_into(const Vec& s, const IndexList* idx, Vec& out) {
  auto run = [&](auto&& each) {
    double mx = -std::numeric_limits<double>::infinity();
    each([&](Index i) { mx = std::max(mx, s[i]); });
    double sum = 0;
    each([&](Index i) {
      out[i] = std::exp(s[i] - mx);
      sum += out[i];
    });
    each([&](Index i) { out[i] = std::max(out[i] / sum, kTiny); });
  };
  if (idx) {
    run([&](auto&& f) {
      for (Index i : *idx) f(i);
    });
  } else {
    run([&](auto&& f) {
      for (Index i = 0; i < s.size(); ++i) f(i);
    });
  }
}

Vec project_block(const Vec& v, const IndexList& idx) {
  Vec sub(static_cast<Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) sub[static_cast<Index>(i)] = v[idx[i]];
  return project_simplex(sub);
}

}  // namespace

double Geometry::generator(const Vec& u) const {
  if (kind == GeometryKind::Euclidean) return 0.5 * u.squaredNorm();
  double s = 0;
  for (Index i = 0; i < u.size(); ++i) s += xlogx(u[i]) - u[i];
  return s;
}

Vec Geometry::generator_gradient(const Vec& u) const {
  if (kind == GeometryKind::Euclidean) return u;
  return u.array().log().matrix();
}

double Geometry::divergence(const Vec& u, const Vec& z) const {
  if (kind == GeometryKind::Euclidean) return 0.5 * (u - z).squaredNorm();
  double s = 0;
  for (Index i = 0; i < u.size(); ++i) {
    if (u[i] > 0) s += u[i] * std::log(u[i] / z[i]);
    s += z[i] - u[i];
  }
  return std::max(s, 0.0);
}

double divergence(const Geometry& geom, const Vec& u, const Vec& z) { return geom.divergence(u, z); }

void AnchorSet::add(const Vec& z, double w) {
  if (w < 0) throw DomainError("anchor weight must be nonnegative");
  anchors_.emplace_back(z, w);
  Vec gz = geom_.generator_gradient(z);
  if (agg_.size() == 0) agg_ = Vec::Zero(z.size());
  if (w > 0) agg_ += w * gz;
}

Vec AnchorSet::recompute() const {
  Vec s = Vec::Zero(agg_.size());
  for (const auto& [z, w] : anchors_)
    if (w > 0) s += w * geom_.generator_gradient(z);
  return s;
}

double AnchorSet::weight_sum() const {
  double s = 0;
  for (const auto& a : anchors_) s += a.second;
  return s;
}

Vec project_simplex(const Vec& v) {
  const Index n = v.size();
  Vec u = v;
  std::sort(u.data(), u.data() + n, std::greater<double>());
  double css = 0, tau = 0;
  for (Index i = 0; i < n; ++i) {
    css += u[i];
    double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) tau = t;
  }
  return (v.array() - tau).max(0.0).matrix();
}

Vec mirror_project(const Geometry& geom, const Domain& dom, const Vec& s) {
  const bool entropy = geom.kind != GeometryKind::Euclidean;
  if (!entropy) {
    switch (dom.kind) {
      case DomainKind::Full: return s;
      case DomainKind::Box: return s.cwiseMax(dom.lo).cwiseMin(dom.hi);
      case DomainKind::Orthant: return s.cwiseMax(0.0);
      case DomainKind::Simplex: return project_simplex(s);
      case DomainKind::BlockSimplex: {
        Vec u(s.size());
        for (const auto& b : dom.blocks) {
          Vec pb = project_block(s, b);
          for (size_t i = 0; i < b.size(); ++i) u[b[i]] = pb[static_cast<Index>(i)];
        }
        return u;
      }
      case DomainKind::Spectraplex: {
        const Index m = dom.order;
        Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>> S(s.data(), m, m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
        Vec lam = project_simplex(es.eigenvalues());
        Eigen::Matrix<double, -1, -1, Eigen::RowMajor> U =
            es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
        U = 0.5 * (U + U.transpose()).eval();
        return Eigen::Map<const Vec>(U.data(), m * m);
      }
    }
  }
  Vec u(s.size());
  switch (dom.kind) {
    case DomainKind::Simplex: softmax_into(s, nullptr, u); return u;
    case DomainKind::BlockSimplex:
      for (const auto& b : dom.blocks) softmax_into(s, &b, u);
      return u;
    case DomainKind::Orthant: return s.array().exp().max(kTiny).matrix();
    default: throw ProxUnsupported("entropy geometry on a " + to_string(dom) + " domain");
  }
}

Vec prox_from_gradient(const Geometry& geom, const Domain& dom, const Vec& g, double a, const ProxFunction& h,
                       double c, const Vec& theta) {
  if (!(c > 0)) throw DomainError("prox stiffness must be positive");
  const bool entropy = geom.kind != GeometryKind::Euclidean;
  if (h.kind == ProxFunction::Kind::Quadratic && entropy)
    throw ProxUnsupported("quadratic term with entropy geometry");
  if (h.kind == ProxFunction::Kind::Entropic && !entropy)
    throw ProxUnsupported("entropic term with euclidean geometry");

  const double m = h.kind == ProxFunction::Kind::Zero ? 0.0 : h.modulus;
  const double denom = a * m + 0.5 * c;
  Vec s = (0.5 * c) * theta - a * g;
  // An empty center is the point where the generator gradient vanishes.
  if (m > 0 && h.center.size() > 0) s += (a * m) * geom.generator_gradient(h.center);
  s /= denom;

  return mirror_project(geom, dom, s);
}

Vec prox_multi(const Geometry& geom, const Domain& dom, const Vec& g, double a, const ProxFunction& h, double c,
               const AnchorSet& anchors) {
  if (std::abs(anchors.weight_sum() - 1.0) > 1e-12) throw DomainError("anchor weights must sum to one");
  return prox_from_gradient(geom, dom, g, a, h, c, anchors.aggregate());
}

double prox_objective(const Geometry& geom, const Vec& u, const Vec& g, double a, const ProxFunction& h, double c,
                      const AnchorSet& anchors) {
  double s = 0;
  for (const auto& [z, w] : anchors.anchors()) s += w * geom.divergence(u, z);
  return a * g.dot(u) + a * h.value(u) + 0.5 * c * s;
}

}  // namespace dlsp
