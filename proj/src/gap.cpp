#include "dlsp/gap.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dlsp/solver_full.hpp"

namespace dlsp {

namespace {

double lagrangian_unchecked(const SaddleProblem& p, const Vec& x, const Vec& y, const Vec& fx) {
  return y.dot(fx) - p.psi.value(y) + p.phi.value(x);
}

// argmax_{v in dom} <g, v>; bound caps coordinates of an orthant when finite.
Vec linear_max(const Domain& dom, const Vec& g, const Vec* bound, const char* side) {
  const Index n = g.size();
  Vec v = Vec::Zero(n);
  switch (dom.kind) {
    case DomainKind::Simplex: {
      Index i = 0;
      g.maxCoeff(&i);
      v[i] = 1;
      return v;
    }
    case DomainKind::BlockSimplex:
      for (const auto& b : dom.blocks) {
        Index best = b.front();
        for (Index j : b)
          if (g[j] > g[best]) best = j;
        v[best] = 1;
      }
      return v;
    case DomainKind::Box:
      for (Index j = 0; j < n; ++j) v[j] = g[j] > 0 ? dom.hi[j] : dom.lo[j];
      return v;
    case DomainKind::Spectraplex: {
      const Index m = dom.order;
      Eigen::Map<const RowMat> G(g.data(), m, m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()));
      Eigen::VectorXd top = es.eigenvectors().col(m - 1);
      RowMat V = top * top.transpose();
      return Eigen::Map<const Vec>(V.data(), m * m);
    }
    case DomainKind::Orthant: {
      const bool capped = bound && bound->size() == n && bound->allFinite();
      for (Index j = 0; j < n; ++j) {
        if (g[j] <= 0) continue;
        if (!capped) throw UnboundedGap(std::string(side) + ": linear term is unbounded on the orthant");
        v[j] = (*bound)[j];
      }
      return v;
    }
    case DomainKind::Full:
      if (!g.isZero(0)) throw UnboundedGap(std::string(side) + ": linear term is unbounded on the full space");
      return v;
  }
  return v;
}

struct InnerResult {
  Vec u;
  double value = 0;
  Index iterations = 0;
};

// min_u <y, f(u)> + phi(u) over X.
InnerResult primal_response(const SaddleProblem& p, const Vec& y, const BestResponseOptions& opt) {
  const Geometry gx{p.geom_x};
  double LF = 0;
  bool affine = true;
  for (Index j = 0; j < p.n; ++j) {
    if (y[j] == 0) continue;
    const auto& c = *p.components[static_cast<size_t>(j)];
    if (c.nonlinear()) affine = false;
    LF += std::abs(y[j]) * p.comp_M[j];
  }
  Vec g(p.d), tmp(p.d);
  auto objective = [&](const Vec& u, Vec* grad) {
    double s = 0;
    if (grad) grad->setZero();
    for (Index j = 0; j < p.n; ++j) {
      if (y[j] == 0) continue;
      s += y[j] * p.components[static_cast<size_t>(j)]->eval(u, grad ? tmp.data() : nullptr);
      if (grad) *grad += y[j] * tmp;
    }
    return s + p.phi.value(u);
  };

  InnerResult out;
  const Vec start = default_x0(p);
  if (affine || LF == 0) {
    objective(start, &g);  // gradient is constant
    const double mu = p.phi.kind == ProxFunction::Kind::Zero ? 0.0 : p.phi.modulus;
    if (mu > 0)
      out.u = mirror_project(gx, p.domain_x, gx.generator_gradient(p.phi.center) - g / mu);
    else
      out.u = linear_max(p.domain_x, -g, nullptr, "primal");
    out.value = objective(out.u, nullptr);
    return out;
  }

  Vec x = start, z = start, w(p.d);
  double fx = objective(x, nullptr);
  int quiet = 0;
  Index it = 0;

  const double mu_phi = p.phi.kind == ProxFunction::Kind::Quadratic ? p.phi.modulus : 0.0;
  if (gx.kind == GeometryKind::Euclidean && mu_phi > 0) {
    // Strongly convex: constant momentum converges linearly at rate 1 - sqrt(mu/L).
    const double q = std::sqrt(mu_phi / (LF + mu_phi));
    const double beta = (1 - q) / (1 + q);
    Vec x_prev = x;
    for (; it < opt.inner_max_iterations; ++it) {
      w = x + beta * (x - x_prev);
      objective(w, &g);
      Vec x_new = prox_from_gradient(gx, p.domain_x, g, 1.0, p.phi, 2.0 * (LF + mu_phi), w);
      const double f_new = objective(x_new, nullptr);
      const double change = fx - f_new;
      x_prev = change < 0 ? x : x_prev;  // drop momentum on an increase
      if (change >= 0) {
        x_prev = std::move(x);
        x = std::move(x_new);
        fx = f_new;
      }
      quiet = std::abs(change) <= opt.inner_tolerance * (1 + std::abs(fx)) ? quiet + 1 : 0;
      if (quiet >= 20) break;
    }
    out.u = std::move(x);
    out.value = fx;
    out.iterations = it;
    return out;
  }

  // Accelerated Bregman proximal gradient with function-value restarts.
  double theta = 1;
  for (; it < opt.inner_max_iterations; ++it) {
    w = (1 - theta) * x + theta * z;
    objective(w, &g);
    Vec z_new = prox_from_gradient(gx, p.domain_x, g, 1.0, p.phi, 2.0 * theta * LF, gx.generator_gradient(z));
    Vec x_new = (1 - theta) * x + theta * z_new;
    const double f_new = objective(x_new, nullptr);
    if (f_new > fx) {  // restart momentum from the current point
      theta = 1;
      z = x;
      // Near the optimum the values only differ by rounding; count that as stalling.
      quiet = f_new - fx <= opt.inner_tolerance * (1 + std::abs(fx)) ? quiet + 1 : 0;
      if (quiet >= 20) break;
      continue;
    }
    const double change = fx - f_new;
    x = std::move(x_new);
    z = std::move(z_new);
    fx = f_new;
    theta = 0.5 * (std::sqrt(theta * theta * theta * theta + 4 * theta * theta) - theta * theta);
    quiet = change <= opt.inner_tolerance * (1 + std::abs(fx)) ? quiet + 1 : 0;
    if (quiet >= 20) break;
  }
  out.u = std::move(x);
  out.value = fx;
  out.iterations = it;
  return out;
}

}  // namespace

double gap(const SaddleProblem& p, const Vec& x, const Vec& y, const Vec& u, const Vec& v) {
  return evaluate_lagrangian(p, x, v) - evaluate_lagrangian(p, u, y);
}

double gap(const SaddleProblem& p, const Vec& x, const Vec& y, const Comparator& c) {
  return gap(p, x, y, c.u, c.v);
}

BestResponse best_response(const SaddleProblem& p, const Vec& x, const Vec& y, const BestResponseOptions& opt) {
  if (x.size() != p.d || !p.domain_x.contains(x)) throw DomainError("x is infeasible");
  if (y.size() != p.n || !p.domain_y.contains(y)) throw DomainError("y is infeasible");
  const Geometry gy{p.geom_y};
  BestResponse br;

  const Vec fx = p.values(x);
  const double nu = p.psi.kind == ProxFunction::Kind::Zero ? 0.0 : p.psi.modulus;
  if (nu > 0)
    br.v = mirror_project(gy, p.domain_y, gy.generator_gradient(p.psi.center) + fx / nu);
  else
    br.v = linear_max(p.domain_y, fx, &p.dual_bound, "dual");
  br.sup_value = lagrangian_unchecked(p, x, br.v, fx);

  InnerResult in = primal_response(p, y, opt);
  br.u = std::move(in.u);
  br.inf_value = in.value - p.psi.value(y);
  br.inner_iterations = in.iterations;
  br.value = br.sup_value - br.inf_value;
  return br;
}

double best_response_gap(const SaddleProblem& p, const Vec& x, const Vec& y, const BestResponseOptions& opt) {
  return best_response(p, x, y, opt).value;
}

Comparator saddle_oracle(const ProblemPtr& p, const SaddleOracleOptions& opt) {
  const double tol = opt.tolerance > 0 ? opt.tolerance : (p->mu > 0 && p->nu > 0 ? 1e-10 : 1e-8);
  MethodSetup setup;
  setup.kind = ScheduleKind::FullVector;
  setup.sampling = Sampling::Uniform;
  Prepared prep = prepare_method(*p, setup);

  Vec bx = default_x0(*p), by = default_y0(*p);
  double best = best_response_gap(*p, bx, by);
  double restart_level = best;
  Index total = 0;
  while (best > tol) {
    FullSolver s(p, prep.schedule, bx, by);
    bool restart = false;
    while (!restart) {
      if (total >= opt.max_iterations)
        throw NoConvergence("saddle oracle hit the iteration cap", best);
      s.run(opt.check_every);
      total += opt.check_every;
      for (int which = 0; which < 2; ++which) {
        const Vec& cx = which == 0 ? s.x() : s.x_average();
        const Vec& cy = which == 0 ? s.y() : s.y_average();
        const double g = best_response_gap(*p, cx, cy);
        if (g < best) {
          best = g;
          bx = cx;
          by = cy;
        }
      }
      if (best <= tol) break;
      if (best <= 0.5 * restart_level) {
        restart_level = best;
        restart = true;
      }
    }
  }
  return {bx, by, Comparator::Source::SaddleOracle};
}

}  // namespace dlsp
