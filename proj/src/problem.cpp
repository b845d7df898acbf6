#include "dlsp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include <Eigen/Eigenvalues>
#include <sstream>

namespace dlsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_entropy(GeometryKind g) { return g != GeometryKind::Euclidean; }

Eigen::MatrixXd sym_matrix(const Vec& v, Index m) {
  Eigen::MatrixXd A = Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(v.data(), m, m);
  return 0.5 * (A + A.transpose());
}

}  // namespace

std::string to_string(GeometryKind g) {
  switch (g) {
    case GeometryKind::Euclidean: return "euclidean";
    case GeometryKind::EntropySimplex: return "entropy-simplex";
    case GeometryKind::EntropyOrthant: return "entropy-orthant";
  }
  return "?";
}

GeometryKind geometry_from_string(const std::string& s) {
  if (s == "euclidean") return GeometryKind::Euclidean;
  if (s == "entropy-simplex") return GeometryKind::EntropySimplex;
  if (s == "entropy-orthant") return GeometryKind::EntropyOrthant;
  throw ParseError("unknown geometry '" + s + "'");
}

double primal_norm(GeometryKind g, const Vec& v) {
  return is_entropy(g) ? v.lpNorm<1>() : v.norm();
}

double dual_norm(GeometryKind g, const Vec& v) {
  return is_entropy(g) ? v.lpNorm<Eigen::Infinity>() : v.norm();
}

// ---------------------------------------------------------------- Domain

bool Domain::compact() const {
  return kind == DomainKind::Box || kind == DomainKind::Simplex || kind == DomainKind::BlockSimplex ||
         kind == DomainKind::Spectraplex;
}

bool Domain::allows_negative(Index j) const {
  switch (kind) {
    case DomainKind::Full: return true;
    case DomainKind::Box: return lo[j] < 0;
    case DomainKind::Spectraplex: return j % (order + 1) != 0;  // off-diagonal entries
    default: return false;
  }
}

bool Domain::contains(const Vec& v, double tol) const {
  if (!v.allFinite()) return false;
  switch (kind) {
    case DomainKind::Full: return true;
    case DomainKind::Box:
      if (lo.size() != v.size()) return false;
      return ((v - lo).array() >= -tol).all() && ((hi - v).array() >= -tol).all();
    case DomainKind::Orthant: return (v.array() >= -tol).all();
    case DomainKind::Simplex:
      return (v.array() >= -tol).all() && std::abs(v.sum() - 1.0) <= tol * std::max<double>(1, v.size());
    case DomainKind::BlockSimplex: {
      if ((v.array() < -tol).any()) return false;
      for (const auto& b : blocks) {
        double s = 0;
        for (Index j : b) s += v[j];
        if (std::abs(s - 1.0) > tol * std::max<double>(1, b.size())) return false;
      }
      return true;
    }
    case DomainKind::Spectraplex: {
      if (v.size() != order * order) return false;
      Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>> A(v.data(), order, order);
      if ((A - A.transpose()).cwiseAbs().maxCoeff() > tol) return false;
      if (std::abs(A.trace() - 1.0) > tol * static_cast<double>(order)) return false;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym_matrix(v, order), Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff() >= -tol;
    }
  }
  return false;
}

double Domain::coord_bound(Index j) const {
  switch (kind) {
    case DomainKind::Box: return std::max(std::abs(lo[j]), std::abs(hi[j]));
    case DomainKind::Simplex:
    case DomainKind::BlockSimplex:
    case DomainKind::Spectraplex: return 1.0;
    default: return kInf;
  }
}

double Domain::sup_abs_linear(const Vec& z) const {
  switch (kind) {
    case DomainKind::Full:
    case DomainKind::Orthant: return z.isZero(0) ? 0.0 : kInf;
    case DomainKind::Box: {
      double up = 0, dn = 0;
      for (Index i = 0; i < z.size(); ++i) {
        up += std::max(z[i] * lo[i], z[i] * hi[i]);
        dn += std::min(z[i] * lo[i], z[i] * hi[i]);
      }
      return std::max(std::abs(up), std::abs(dn));
    }
    case DomainKind::Simplex: return z.size() ? std::max(std::abs(z.maxCoeff()), std::abs(z.minCoeff())) : 0.0;
    case DomainKind::BlockSimplex: {
      double up = 0, dn = 0;
      for (const auto& b : blocks) {
        double mx = -kInf, mn = kInf;
        for (Index j : b) {
          mx = std::max(mx, z[j]);
          mn = std::min(mn, z[j]);
        }
        up += mx;
        dn += mn;
      }
      return std::max(std::abs(up), std::abs(dn));
    }
    case DomainKind::Spectraplex: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym_matrix(z, order), Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
  }
  return kInf;
}

Domain Domain::restrict(const IndexList& idx) const {
  switch (kind) {
    case DomainKind::Full:
    case DomainKind::Orthant: return *this;
    case DomainKind::Box: {
      Vec l(idx.size()), h(idx.size());
      for (size_t i = 0; i < idx.size(); ++i) {
        l[static_cast<Index>(i)] = lo[idx[i]];
        h[static_cast<Index>(i)] = hi[idx[i]];
      }
      return box(l, h);
    }
    case DomainKind::BlockSimplex: {
      std::set<Index> want(idx.begin(), idx.end());
      for (const auto& b : blocks)
        if (std::set<Index>(b.begin(), b.end()) == want) return simplex();
      throw SeparabilityError("index set is not a block of the dual simplex product");
    }
    case DomainKind::Simplex:
      throw SeparabilityError("a single simplex does not factor over a strict subset of coordinates");
    case DomainKind::Spectraplex:
      throw SeparabilityError("the spectraplex does not factor over coordinates");
  }
  return *this;
}

Vec Domain::center(Index dim, GeometryKind g) const {
  switch (kind) {
    case DomainKind::Full: return Vec::Zero(dim);
    case DomainKind::Box: return Vec::Zero(dim).cwiseMax(lo).cwiseMin(hi);
    case DomainKind::Orthant: return is_entropy(g) ? Vec::Ones(dim) : Vec::Zero(dim);
    case DomainKind::Simplex: return Vec::Constant(dim, 1.0 / static_cast<double>(dim));
    case DomainKind::BlockSimplex: {
      Vec c(dim);
      for (const auto& b : blocks)
        for (Index j : b) c[j] = 1.0 / static_cast<double>(b.size());
      return c;
    }
    case DomainKind::Spectraplex: {
      Vec c = Vec::Zero(dim);
      for (Index i = 0; i < order; ++i) c[i * order + i] = 1.0 / static_cast<double>(order);
      return c;
    }
  }
  return Vec::Zero(dim);
}

std::string to_string(const Domain& d) {
  switch (d.kind) {
    case DomainKind::Full: return "full";
    case DomainKind::Box: return "box";
    case DomainKind::Orthant: return "orthant";
    case DomainKind::Simplex: return "simplex";
    case DomainKind::BlockSimplex: return "block-simplex";
    case DomainKind::Spectraplex: return "spectraplex";
  }
  return "?";
}

// ---------------------------------------------------------------- ProxFunction

double ProxFunction::value(const Vec& u) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Quadratic:
      return 0.5 * modulus * (center.size() ? (u - center).squaredNorm() : u.squaredNorm());
    case Kind::Entropic: {
      double s = 0;
      for (Index i = 0; i < u.size(); ++i) {
        const double ci = center.size() ? center[i] : 1.0;
        if (u[i] > 0) s += u[i] * std::log(u[i] / ci);
        s += ci - u[i];
      }
      return modulus * s;
    }
  }
  return 0.0;
}

ProxFunction ProxFunction::restrict(const IndexList& idx) const {
  ProxFunction r{kind, modulus, Vec()};
  if (center.size()) {
    r.center.resize(static_cast<Index>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i) r.center[static_cast<Index>(i)] = center[idx[i]];
  }
  return r;
}

// ---------------------------------------------------------------- components

Vec Component::gradient(const Vec& x) const {
  Vec g(x.size());
  eval(x, g.data());
  return g;
}

namespace {

void write_vec(std::ostream& os, const Vec& v) {
  Index nnz = (v.array() != 0).count();
  if (2 * nnz < v.size()) {
    os << "sparse " << v.size() << ' ' << nnz;
    for (Index i = 0; i < v.size(); ++i)
      if (v[i] != 0) os << ' ' << i << ':' << v[i];
  } else {
    os << "dense " << v.size();
    for (Index i = 0; i < v.size(); ++i) os << ' ' << v[i];
  }
}

std::string fmt(const std::function<void(std::ostream&)>& f) {
  std::ostringstream os;
  os << std::setprecision(17);
  f(os);
  return os.str();
}

}  // namespace

double AffineComponent::eval(const Vec& x, double* grad) const {
  if (grad) Eigen::Map<Vec>(grad, a_.size()) = a_;
  return a_.dot(x) + c_;
}

double AffineComponent::lipschitz(const Domain&, GeometryKind g) const { return dual_norm(g, a_); }

std::string AffineComponent::serialize() const {
  return fmt([&](std::ostream& os) { os << "affine " << c_ << ' '; write_vec(os, a_); });
}

double SquaredAffineComponent::eval(const Vec& x, double* grad) const {
  double r = z_.dot(x) - b_;
  if (grad) Eigen::Map<Vec>(grad, z_.size()) = r * z_;
  return 0.5 * r * r;
}

double SquaredAffineComponent::lipschitz(const Domain& X, GeometryKind g) const {
  double zn = dual_norm(g, z_);
  if (zn == 0) return 0.0;
  return zn * (X.sup_abs_linear(z_) + std::abs(b_));
}

double SquaredAffineComponent::smoothness(GeometryKind g) const {
  double zn = dual_norm(g, z_);
  return zn * zn;
}

std::string SquaredAffineComponent::serialize() const {
  return fmt([&](std::ostream& os) { os << "squared-affine " << b_ << ' '; write_vec(os, z_); });
}

double LogisticComponent::eval(const Vec& x, double* grad) const {
  double m = -b_ * z_.dot(x);
  double f = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
  if (grad) {
    double sig = m > 0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m));
    Eigen::Map<Vec>(grad, z_.size()) = (-b_ * sig) * z_;
  }
  return f;
}

double LogisticComponent::lipschitz(const Domain&, GeometryKind g) const {
  return std::abs(b_) * dual_norm(g, z_);
}

double LogisticComponent::smoothness(GeometryKind g) const {
  double zn = dual_norm(g, z_);
  return 0.25 * b_ * b_ * zn * zn;
}

std::string LogisticComponent::serialize() const {
  return fmt([&](std::ostream& os) { os << "logistic " << b_ << ' '; write_vec(os, z_); });
}

double HuberComponent::eval(const Vec& x, double* grad) const {
  double r = z_.dot(x) - b_;
  double s = std::clamp(r, -delta_, delta_);
  if (grad) Eigen::Map<Vec>(grad, z_.size()) = s * z_;
  return std::abs(r) <= delta_ ? 0.5 * r * r : delta_ * (std::abs(r) - 0.5 * delta_);
}

double HuberComponent::lipschitz(const Domain& X, GeometryKind g) const {
  double zn = dual_norm(g, z_);
  if (zn == 0) return 0.0;
  return zn * std::min(delta_, X.sup_abs_linear(z_) + std::abs(b_));
}

double HuberComponent::smoothness(GeometryKind g) const {
  double zn = dual_norm(g, z_);
  return zn * zn;
}

std::string HuberComponent::serialize() const {
  return fmt([&](std::ostream& os) { os << "huber " << b_ << ' ' << delta_ << ' '; write_vec(os, z_); });
}

// ---------------------------------------------------------------- partition

std::vector<IndexList> BlockPartition::contiguous(Index n, Index N) {
  if (N < 1 || N > n) throw PartitionError("need 1 <= N <= n, got N=" + std::to_string(N));
  std::vector<IndexList> out(static_cast<size_t>(N));
  Index base = n / N, extra = n % N, j = 0;
  for (Index I = 0; I < N; ++I) {
    Index sz = base + (I < extra ? 1 : 0);
    for (Index k = 0; k < sz; ++k) out[static_cast<size_t>(I)].push_back(j++);
  }
  return out;
}

Vec SaddleProblem::values(const Vec& x) const {
  Vec f(n);
  for (Index j = 0; j < n; ++j) f[j] = components[static_cast<size_t>(j)]->value(x);
  return f;
}

// ---------------------------------------------------------------- build

namespace {

void check_geometry(GeometryKind g, const Domain& dom, const char* side) {
  bool ok = true;
  if (g == GeometryKind::EntropySimplex)
    ok = dom.kind == DomainKind::Simplex || dom.kind == DomainKind::BlockSimplex;
  else if (g == GeometryKind::EntropyOrthant)
    ok = dom.kind == DomainKind::Orthant;
  if (!ok)
    throw ProxUnsupported(std::string(side) + ": geometry " + to_string(g) + " on a " + to_string(dom) +
                          " domain");
}

void resolve_prox(ProxFunction& h, GeometryKind g, const Domain& dom, Index dim, const char* side) {
  if (h.modulus < 0) throw ConvexityError(std::string(side) + ": negative modulus");
  if (h.kind == ProxFunction::Kind::Quadratic && g != GeometryKind::Euclidean)
    throw ProxUnsupported(std::string(side) + ": quadratic term needs euclidean geometry");
  if (h.kind == ProxFunction::Kind::Entropic && g == GeometryKind::Euclidean)
    throw ProxUnsupported(std::string(side) + ": entropic term needs entropy geometry");
  if (h.kind == ProxFunction::Kind::Zero) {
    h.modulus = 0;
    return;
  }
  if (h.center.size() == 0)
    h.center = h.kind == ProxFunction::Kind::Quadratic ? Vec::Zero(dim) : dom.center(dim, g);
  if (h.center.size() != dim) throw DomainError(std::string(side) + ": center has wrong length");
  if (h.kind == ProxFunction::Kind::Entropic && (h.center.array() <= 0).any())
    throw DomainError(std::string(side) + ": entropic anchor must be positive");
}

void check_domain_dims(const Domain& dom, Index dim, const char* side) {
  if (dom.kind == DomainKind::Spectraplex && dom.order * dom.order != dim)
    throw DomainError(std::string(side) + ": spectraplex order does not match the dimension");
  if (dom.kind == DomainKind::Box) {
    if (dom.lo.size() != dim || dom.hi.size() != dim)
      throw DomainError(std::string(side) + ": box bounds have wrong length");
    if ((dom.lo.array() > dom.hi.array()).any()) throw DomainError(std::string(side) + ": empty box");
  }
}

}  // namespace

ProblemPtr build_problem(ProblemSpec spec) {
  auto p = std::make_shared<SaddleProblem>();
  p->n = static_cast<Index>(spec.components.size());
  if (p->n < 1) throw PartitionError("problem has no components");
  if (spec.d < 1) throw DomainError("primal dimension must be positive");
  p->d = spec.d;
  p->components = std::move(spec.components);

  auto& part = p->partition;
  part.blocks = spec.partition.blocks.empty() ? BlockPartition::contiguous(p->n, spec.partition.num_blocks)
                                              : spec.partition.blocks;
  p->N = part.num_blocks();
  part.block_of.assign(static_cast<size_t>(p->n), -1);
  for (Index I = 0; I < p->N; ++I) {
    const auto& b = part.blocks[static_cast<size_t>(I)];
    if (b.empty()) throw PartitionError("block " + std::to_string(I) + " is empty");
    for (Index j : b) {
      if (j < 0 || j >= p->n) throw PartitionError("index " + std::to_string(j) + " out of range");
      if (part.block_of[static_cast<size_t>(j)] != -1)
        throw PartitionError("index " + std::to_string(j) + " appears in two blocks");
      part.block_of[static_cast<size_t>(j)] = I;
    }
  }
  for (Index j = 0; j < p->n; ++j)
    if (part.block_of[static_cast<size_t>(j)] == -1)
      throw PartitionError("index " + std::to_string(j) + " is not covered");

  p->domain_x = std::move(spec.domain_x);
  p->domain_y = std::move(spec.domain_y);
  if (p->domain_y.kind == DomainKind::BlockSimplex && p->domain_y.blocks.empty())
    p->domain_y.blocks = part.blocks;
  if (p->domain_x.kind == DomainKind::BlockSimplex && p->domain_x.blocks.empty())
    throw DomainError("primal block-simplex needs explicit blocks");
  check_domain_dims(p->domain_x, p->d, "X");
  check_domain_dims(p->domain_y, p->n, "Y");
  p->geom_x = spec.geom_x;
  p->geom_y = spec.geom_y;
  check_geometry(p->geom_x, p->domain_x, "X");
  check_geometry(p->geom_y, p->domain_y, "Y");

  for (Index j = 0; j < p->n; ++j)
    if (p->components[static_cast<size_t>(j)]->nonlinear() && p->domain_y.allows_negative(j))
      throw ConvexityError("component " + std::to_string(j) + " is nonlinear but y_j may be negative");

  p->phi = std::move(spec.phi);
  p->psi = std::move(spec.psi);
  resolve_prox(p->phi, p->geom_x, p->domain_x, p->d, "phi");
  resolve_prox(p->psi, p->geom_y, p->domain_y, p->n, "psi");
  p->mu = p->phi.modulus;
  p->nu = p->psi.modulus;

  p->comp_G.resize(p->n);
  p->comp_M.resize(p->n);
  p->dual_bound.resize(p->n);
  for (Index j = 0; j < p->n; ++j) {
    const auto& c = *p->components[static_cast<size_t>(j)];
    p->comp_G[j] = c.lipschitz(p->domain_x, p->geom_x);
    p->comp_M[j] = c.smoothness(p->geom_x);
    p->dual_bound[j] = spec.dual_bound ? (*spec.dual_bound)[j] : p->domain_y.coord_bound(j);
    if (p->comp_M[j] > 0 && !std::isfinite(p->dual_bound[j]))
      throw DegenerateConstants("component " + std::to_string(j) +
                                " is smooth-nonlinear but has no finite dual bound");
  }

  part.block_G.resize(p->N);
  part.block_L.resize(p->N);
  for (Index I = 0; I < p->N; ++I) {
    double g2 = 0, l = 0;
    for (Index j : part.blocks[static_cast<size_t>(I)]) {
      g2 += p->comp_G[j] * p->comp_G[j];
      if (p->comp_M[j] > 0) l += p->dual_bound[j] * p->comp_M[j];
    }
    part.block_G[I] = std::sqrt(g2);
    part.block_L[I] = l;
  }
  if (spec.partition.block_G) {
    if (spec.partition.block_G->size() != p->N) throw PartitionError("block_G override has wrong length");
    part.block_G = *spec.partition.block_G;
  }
  if (spec.partition.block_L) {
    if (spec.partition.block_L->size() != p->N) throw PartitionError("block_L override has wrong length");
    part.block_L = *spec.partition.block_L;
  }
  part.block_lambda = (part.block_G.array().square() + part.block_L.array().square()).sqrt();

  if (p->dual_norm_p() == 1)
    p->aggregate_G = std::min(p->comp_G.maxCoeff(), part.block_G.maxCoeff());
  else
    p->aggregate_G = std::min(p->comp_G.norm(), part.block_G.norm());
  double L = part.block_L.sum();
  if (p->domain_y.kind == DomainKind::Simplex) {
    L = std::min(L, p->comp_M.maxCoeff());
  } else if (p->domain_y.kind == DomainKind::BlockSimplex) {
    double s = 0;
    for (const auto& b : p->domain_y.blocks) {
      double m = 0;
      for (Index j : b) m = std::max(m, p->comp_M[j]);
      s += m;
    }
    L = std::min(L, s);
  }
  p->aggregate_L = L;

  switch (p->domain_y.kind) {
    case DomainKind::Simplex: p->dual_separable = p->N == 1; break;
    case DomainKind::BlockSimplex: {
      std::set<std::set<Index>> a, b;
      for (const auto& blk : p->domain_y.blocks) a.insert(std::set<Index>(blk.begin(), blk.end()));
      for (const auto& blk : part.blocks) b.insert(std::set<Index>(blk.begin(), blk.end()));
      p->dual_separable = a == b;
      break;
    }
    case DomainKind::Spectraplex: p->dual_separable = p->N == 1; break;
    default: p->dual_separable = true;
  }
  return p;
}

double evaluate_lagrangian(const SaddleProblem& p, const Vec& x, const Vec& y) {
  if (x.size() != p.d || !p.domain_x.contains(x)) throw DomainError("x is infeasible");
  if (y.size() != p.n || !p.domain_y.contains(y)) throw DomainError("y is infeasible");
  return y.dot(p.values(x)) - p.psi.value(y) + p.phi.value(x);
}

BlockEval block_gradient(const SaddleProblem& p, const Vec& x, Index I) {
  if (x.size() != p.d || !p.domain_x.contains(x)) throw DomainError("x is infeasible");
  const auto& b = p.block(I);
  BlockEval out{Vec(static_cast<Index>(b.size())), RowMat(static_cast<Index>(b.size()), p.d)};
  for (size_t i = 0; i < b.size(); ++i)
    out.values[static_cast<Index>(i)] =
        p.components[static_cast<size_t>(b[i])]->eval(x, out.grads.row(static_cast<Index>(i)).data());
  return out;
}

// ---------------------------------------------------------------- text format

namespace {

void write_domain(std::ostream& os, const Domain& d) {
  os << to_string(d);
  if (d.kind == DomainKind::Spectraplex) os << ' ' << d.order;
  if (d.kind == DomainKind::Box) {
    os << ' ';
    write_vec(os, d.lo);
    os << ' ';
    write_vec(os, d.hi);
  }
}

void write_prox(std::ostream& os, const ProxFunction& h) {
  switch (h.kind) {
    case ProxFunction::Kind::Zero: os << "zero"; return;
    case ProxFunction::Kind::Quadratic: os << "quadratic " << h.modulus << ' '; break;
    case ProxFunction::Kind::Entropic: os << "entropic " << h.modulus << ' '; break;
  }
  write_vec(os, h.center);
}

struct Reader {
  std::istream& is;
  int line = 0;
  std::istringstream cur;

  bool next() {
    std::string s;
    while (std::getline(is, s)) {
      ++line;
      auto pos = s.find('#');
      if (pos != std::string::npos) s.erase(pos);
      if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
      cur.clear();
      cur.str(s);
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& m) const {
    throw ParseError("line " + std::to_string(line) + ": " + m);
  }
  std::string word() {
    std::string w;
    if (!(cur >> w)) fail("unexpected end of line");
    return w;
  }
  double num() {
    std::string w = word();
    try {
      size_t k = 0;
      double v = std::stod(w, &k);
      if (k != w.size()) fail("bad number '" + w + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad number '" + w + "'");
    }
  }
  Index integer() {
    double v = num();
    if (v != std::floor(v)) fail("expected integer");
    return static_cast<Index>(v);
  }
  void expect(const std::string& w) {
    auto got = word();
    if (got != w) fail("expected '" + w + "', got '" + got + "'");
  }
  Vec vec() {
    std::string mode = word();
    Index len = integer();
    if (len < 0) fail("negative length");
    Vec v = Vec::Zero(len);
    if (mode == "dense") {
      for (Index i = 0; i < len; ++i) v[i] = num();
    } else if (mode == "sparse") {
      Index nnz = integer();
      for (Index k = 0; k < nnz; ++k) {
        std::string e = word();
        auto c = e.find(':');
        if (c == std::string::npos) fail("bad sparse entry '" + e + "'");
        Index i = std::stol(e.substr(0, c));
        if (i < 0 || i >= len) fail("sparse index out of range");
        v[i] = std::stod(e.substr(c + 1));
      }
    } else {
      fail("expected dense|sparse, got '" + mode + "'");
    }
    return v;
  }
  Domain domain() {
    std::string k = word();
    if (k == "full") return Domain::full();
    if (k == "orthant") return Domain::orthant();
    if (k == "simplex") return Domain::simplex();
    if (k == "block-simplex") return Domain::block_simplex();
    if (k == "spectraplex") return Domain::spectraplex(integer());
    if (k == "box") {
      Vec lo = vec();
      Vec hi = vec();
      return Domain::box(lo, hi);
    }
    fail("unknown domain '" + k + "'");
  }
  ProxFunction prox() {
    std::string k = word();
    if (k == "zero") return ProxFunction::zero();
    double m = num();
    Vec c = vec();
    if (k == "quadratic") return ProxFunction::quadratic(m, c);
    if (k == "entropic") return ProxFunction::entropic(m, c);
    fail("unknown prox term '" + k + "'");
  }
};

}  // namespace

void save_problem(const SaddleProblem& p, std::ostream& os) {
  auto old = os.precision(17);
  os << "dlsp-problem 1\n";
  os << "dims " << p.d << ' ' << p.n << ' ' << p.N << '\n';
  os << "geometry " << to_string(p.geom_x) << ' ' << to_string(p.geom_y) << '\n';
  os << "moduli " << p.mu << ' ' << p.nu << '\n';
  os << "domain_x ";
  write_domain(os, p.domain_x);
  os << "\ndomain_y ";
  write_domain(os, p.domain_y);
  os << "\nphi ";
  write_prox(os, p.phi);
  os << "\npsi ";
  write_prox(os, p.psi);
  os << "\ndual_bound ";
  write_vec(os, p.dual_bound);
  os << '\n';
  for (const auto& b : p.partition.blocks) {
    os << "block " << b.size();
    for (Index j : b) os << ' ' << j;
    os << '\n';
  }
  for (const auto& c : p.components) {
    std::string s = c->serialize();
    if (s.empty()) throw ParseError("component kind '" + c->kind() + "' cannot be serialized");
    os << "component " << s << '\n';
  }
  os.precision(old);
}

ProblemPtr load_problem(std::istream& is) {
  Reader r{is};
  if (!r.next()) throw ParseError("empty problem file");
  r.expect("dlsp-problem");
  if (r.integer() != 1) r.fail("unsupported version");
  ProblemSpec spec;
  Index n = -1, N = -1;
  double mu = 0, nu = 0;
  bool have_moduli = false;
  while (r.next()) {
    std::string key = r.word();
    if (key == "dims") {
      spec.d = r.integer();
      n = r.integer();
      N = r.integer();
    } else if (key == "geometry") {
      try {
        spec.geom_x = geometry_from_string(r.word());
        spec.geom_y = geometry_from_string(r.word());
      } catch (const ParseError& e) {
        r.fail(e.what());
      }
    } else if (key == "moduli") {
      mu = r.num();
      nu = r.num();
      have_moduli = true;
    } else if (key == "domain_x") {
      spec.domain_x = r.domain();
    } else if (key == "domain_y") {
      spec.domain_y = r.domain();
    } else if (key == "phi") {
      spec.phi = r.prox();
    } else if (key == "psi") {
      spec.psi = r.prox();
    } else if (key == "dual_bound") {
      spec.dual_bound = r.vec();
    } else if (key == "block") {
      Index sz = r.integer();
      IndexList b;
      for (Index k = 0; k < sz; ++k) b.push_back(r.integer());
      spec.partition.blocks.push_back(std::move(b));
    } else if (key == "component") {
      std::string kind = r.word();
      if (kind == "affine") {
        double c = r.num();
        spec.components.push_back(std::make_shared<AffineComponent>(r.vec(), c));
      } else if (kind == "squared-affine") {
        double b = r.num();
        spec.components.push_back(std::make_shared<SquaredAffineComponent>(r.vec(), b));
      } else if (kind == "logistic") {
        double b = r.num();
        spec.components.push_back(std::make_shared<LogisticComponent>(r.vec(), b));
      } else if (kind == "huber") {
        double b = r.num();
        double delta = r.num();
        spec.components.push_back(std::make_shared<HuberComponent>(r.vec(), b, delta));
      } else {
        r.fail("component kind '" + kind + "' is not loadable");
      }
    } else {
      r.fail("unknown key '" + key + "'");
    }
  }
  if (n < 0) throw ParseError("missing dims line");
  if (static_cast<Index>(spec.components.size()) != n)
    throw ParseError("dims says n=" + std::to_string(n) + " but found " + std::to_string(spec.components.size()) +
                     " components");
  if (spec.dual_bound) {
    // Infinite bounds are written as inf; keep only finite overrides meaningful.
    if (spec.dual_bound->size() != n) throw ParseError("dual_bound has wrong length");
  }
  if (spec.partition.blocks.empty()) spec.partition.num_blocks = N;
  auto p = build_problem(std::move(spec));
  if (p->N != N) throw ParseError("dims says N=" + std::to_string(N) + " but blocks give " + std::to_string(p->N));
  if (have_moduli && (std::abs(p->mu - mu) > 1e-12 * (1 + mu) || std::abs(p->nu - nu) > 1e-12 * (1 + nu)))
    throw ParseError("header moduli do not match the phi/psi terms");
  return p;
}

}  // namespace dlsp
