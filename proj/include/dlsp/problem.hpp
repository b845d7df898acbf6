#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dlsp/errors.hpp"

namespace dlsp {

using Vec = Eigen::VectorXd;
using Index = Eigen::Index;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexList = std::vector<Index>;

enum class GeometryKind { Euclidean, EntropySimplex, EntropyOrthant };

std::string to_string(GeometryKind g);
GeometryKind geometry_from_string(const std::string& s);

// Norm on the primal space implied by a geometry: l2 for Euclidean, l1 for entropy.
double primal_norm(GeometryKind g, const Vec& v);
double dual_norm(GeometryKind g, const Vec& v);

enum class DomainKind { Full, Box, Orthant, Simplex, BlockSimplex, Spectraplex };

struct Domain {
  DomainKind kind = DomainKind::Full;
  Vec lo, hi;                      // Box
  std::vector<IndexList> blocks;   // BlockSimplex
  Index order = 0;                 // Spectraplex: m for row-major vec of m x m matrices

  static Domain full() { return {}; }
  static Domain orthant() { return {DomainKind::Orthant, {}, {}, {}}; }
  static Domain simplex() { return {DomainKind::Simplex, {}, {}, {}}; }
  // Blocks are taken from the problem partition when left empty.
  static Domain block_simplex(std::vector<IndexList> b = {}) {
    return {DomainKind::BlockSimplex, {}, {}, std::move(b)};
  }
  static Domain box(Vec lo, Vec hi) { return {DomainKind::Box, std::move(lo), std::move(hi), {}}; }
  // Symmetric PSD m x m matrices with unit trace, stored row-major (n = m^2).
  static Domain spectraplex(Index m) { return {DomainKind::Spectraplex, {}, {}, {}, m}; }
  static Domain box(Index dim, double lo, double hi) {
    return box(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
  }

  bool compact() const;
  bool allows_negative(Index j) const;
  bool contains(const Vec& v, double tol = 1e-9) const;
  // sup over the domain of |v_j|; +inf when unbounded.
  double coord_bound(Index j) const;
  // sup over the domain of |<z, v>|; +inf when unbounded.
  double sup_abs_linear(const Vec& z) const;
  // Restriction to a subset of coordinates; requires the domain to factor over it.
  Domain restrict(const IndexList& idx) const;
  // A point in the relative interior, used as the default start.
  Vec center(Index dim, GeometryKind g) const;
};

std::string to_string(const Domain& d);

// Prox-friendly convex term: zero, (m/2)||u - c||^2, or m * KL(u || c).
struct ProxFunction {
  enum class Kind { Zero, Quadratic, Entropic };
  Kind kind = Kind::Zero;
  double modulus = 0.0;
  Vec center;  // resolved at build time when empty

  static ProxFunction zero() { return {}; }
  static ProxFunction quadratic(double m, Vec c = {}) { return {Kind::Quadratic, m, std::move(c)}; }
  static ProxFunction entropic(double m, Vec c = {}) { return {Kind::Entropic, m, std::move(c)}; }

  double value(const Vec& u) const;
  ProxFunction restrict(const IndexList& idx) const;
};

class Component {
 public:
  virtual ~Component() = default;
  // Returns f(x); writes grad f(x) into grad when non-null (length d).
  virtual double eval(const Vec& x, double* grad) const = 0;
  virtual bool nonlinear() const = 0;
  virtual std::string kind() const = 0;
  // sup_x ||grad f(x)||_* over the domain.
  virtual double lipschitz(const Domain& X, GeometryKind g) const = 0;
  virtual double smoothness(GeometryKind g) const = 0;
  // Text payload for serialization; empty when the kind is not serializable.
  virtual std::string serialize() const { return {}; }

  double value(const Vec& x) const { return eval(x, nullptr); }
  Vec gradient(const Vec& x) const;
};

using ComponentPtr = std::shared_ptr<const Component>;

// f(x) = <a, x> + c
class AffineComponent : public Component {
 public:
  AffineComponent(Vec a, double c) : a_(std::move(a)), c_(c) {}
  double eval(const Vec& x, double* grad) const override;
  bool nonlinear() const override { return false; }
  std::string kind() const override { return "affine"; }
  double lipschitz(const Domain&, GeometryKind g) const override;
  double smoothness(GeometryKind) const override { return 0.0; }
  std::string serialize() const override;
  const Vec& coef() const { return a_; }
  double offset() const { return c_; }

 private:
  Vec a_;
  double c_;
};

// f(x) = (z'x - b)^2 / 2
class SquaredAffineComponent : public Component {
 public:
  SquaredAffineComponent(Vec z, double b) : z_(std::move(z)), b_(b) {}
  double eval(const Vec& x, double* grad) const override;
  bool nonlinear() const override { return true; }
  std::string kind() const override { return "squared-affine"; }
  double lipschitz(const Domain& X, GeometryKind g) const override;
  double smoothness(GeometryKind g) const override;
  std::string serialize() const override;

 private:
  Vec z_;
  double b_;
};

// f(x) = log(1 + exp(-b z'x))
class LogisticComponent : public Component {
 public:
  LogisticComponent(Vec z, double b) : z_(std::move(z)), b_(b) {}
  double eval(const Vec& x, double* grad) const override;
  bool nonlinear() const override { return true; }
  std::string kind() const override { return "logistic"; }
  double lipschitz(const Domain& X, GeometryKind g) const override;
  double smoothness(GeometryKind g) const override;
  std::string serialize() const override;

 private:
  Vec z_;
  double b_;
};

// f(x) = huber_delta(z'x - b)
class HuberComponent : public Component {
 public:
  HuberComponent(Vec z, double b, double delta) : z_(std::move(z)), b_(b), delta_(delta) {}
  double eval(const Vec& x, double* grad) const override;
  bool nonlinear() const override { return true; }
  std::string kind() const override { return "huber"; }
  double lipschitz(const Domain& X, GeometryKind g) const override;
  double smoothness(GeometryKind g) const override;
  std::string serialize() const override;

 private:
  Vec z_;
  double b_, delta_;
};

// User-supplied oracle with declared constants.
class CustomComponent : public Component {
 public:
  using Fn = std::function<double(const Vec&, double*)>;
  CustomComponent(Fn fn, double G, double M, bool nonlinear)
      : fn_(std::move(fn)), G_(G), M_(M), nonlinear_(nonlinear) {}
  double eval(const Vec& x, double* grad) const override { return fn_(x, grad); }
  bool nonlinear() const override { return nonlinear_; }
  std::string kind() const override { return "custom"; }
  double lipschitz(const Domain&, GeometryKind) const override { return G_; }
  double smoothness(GeometryKind) const override { return M_; }

 private:
  Fn fn_;
  double G_, M_;
  bool nonlinear_;
};

struct BlockPartition {
  std::vector<IndexList> blocks;
  std::vector<Index> block_of;  // component index -> block
  Vec block_G, block_L, block_lambda;

  Index num_blocks() const { return static_cast<Index>(blocks.size()); }
  static std::vector<IndexList> contiguous(Index n, Index N);
};

struct PartitionSpec {
  std::vector<IndexList> blocks;  // empty: contiguous split into num_blocks
  Index num_blocks = 1;
  // Optional tighter measured constants; used instead of the conservative bounds.
  std::optional<Vec> block_G, block_L;
};

struct SaddleProblem {
  Index d = 0, n = 0, N = 0;
  std::vector<ComponentPtr> components;
  BlockPartition partition;
  ProxFunction phi, psi;
  Domain domain_x, domain_y;
  GeometryKind geom_x = GeometryKind::Euclidean, geom_y = GeometryKind::Euclidean;
  Vec comp_G, comp_M, dual_bound;
  double aggregate_G = 0, aggregate_L = 0;
  double mu = 0, nu = 0;
  bool dual_separable = false;

  // p of the l_p norm on Y: 1 for entropy geometry, 2 otherwise.
  int dual_norm_p() const { return geom_y == GeometryKind::Euclidean ? 2 : 1; }
  const IndexList& block(Index I) const { return partition.blocks[static_cast<size_t>(I)]; }
  Vec values(const Vec& x) const;
};

using ProblemPtr = std::shared_ptr<const SaddleProblem>;

struct ProblemSpec {
  std::vector<ComponentPtr> components;
  PartitionSpec partition;
  ProxFunction phi, psi;
  Domain domain_x, domain_y;
  GeometryKind geom_x = GeometryKind::Euclidean, geom_y = GeometryKind::Euclidean;
  Index d = 0;
  // Per-component dual bounds D_j; required for unbounded Y when some M_j > 0.
  std::optional<Vec> dual_bound;
};

ProblemPtr build_problem(ProblemSpec spec);

double evaluate_lagrangian(const SaddleProblem& p, const Vec& x, const Vec& y);

struct BlockEval {
  Vec values;
  RowMat grads;  // |B_I| x d
};

BlockEval block_gradient(const SaddleProblem& p, const Vec& x, Index I);

void save_problem(const SaddleProblem& p, std::ostream& os);
ProblemPtr load_problem(std::istream& is);

}  // namespace dlsp
