#pragma once

#include <utility>
#include <vector>

#include "dlsp/problem.hpp"

namespace dlsp {

// Bregman generator of one of the two supported families. Entropy uses the
// generalized negentropy sum(u log u - u), so the divergence is generalized KL
// (plain KL on the simplex).
struct Geometry {
  GeometryKind kind = GeometryKind::Euclidean;

  double generator(const Vec& u) const;
  Vec generator_gradient(const Vec& u) const;
  double divergence(const Vec& u, const Vec& z) const;
  double norm(const Vec& v) const { return primal_norm(kind, v); }
};

// Weighted anchors for the multi-anchor prox. The aggregate generator gradient
// is what the prox actually consumes.
class AnchorSet {
 public:
  explicit AnchorSet(Geometry g) : geom_(g) {}
  void add(const Vec& z, double w);
  const Vec& aggregate() const { return agg_; }
  Vec recompute() const;
  double weight_sum() const;
  const std::vector<std::pair<Vec, double>>& anchors() const { return anchors_; }

 private:
  Geometry geom_;
  std::vector<std::pair<Vec, double>> anchors_;
  Vec agg_;
};

// argmin_{u in dom} a<g,u> + a h(u) + (c/2) sum_i w_i D(u, z_i), where theta is
// sum_i w_i grad_gen(z_i) and the weights sum to one.
Vec prox_from_gradient(const Geometry& geom, const Domain& dom, const Vec& g, double a, const ProxFunction& h,
                       double c, const Vec& theta);

Vec prox_multi(const Geometry& geom, const Domain& dom, const Vec& g, double a, const ProxFunction& h, double c,
               const AnchorSet& anchors);

double divergence(const Geometry& geom, const Vec& u, const Vec& z);

// Maps a generator-gradient point s back to the domain: the minimizer of
// gen(u) - <s, u> over dom (Euclidean projection, or normalized exponential).
Vec mirror_project(const Geometry& geom, const Domain& dom, const Vec& s);

// Euclidean projection onto the probability simplex (sort based).
Vec project_simplex(const Vec& v);

// Value of the prox objective, used by tests and diagnostics.
double prox_objective(const Geometry& geom, const Vec& u, const Vec& g, double a, const ProxFunction& h, double c,
                      const AnchorSet& anchors);

}  // namespace dlsp
