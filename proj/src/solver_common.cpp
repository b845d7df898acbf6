#include "dlsp/solver_common.hpp"

namespace dlsp {

Vec eval_values(const SaddleProblem& p, const Vec& x, const IndexList& idx, long long& calls) {
  Vec v(static_cast<Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) v[static_cast<Index>(i)] = p.components[static_cast<size_t>(idx[i])]->value(x);
  calls += static_cast<long long>(idx.size());
  return v;
}

BlockEval eval_block(const SaddleProblem& p, const Vec& x, const IndexList& idx, long long& calls) {
  BlockEval e;
  e.values.resize(static_cast<Index>(idx.size()));
  e.grads.resize(static_cast<Index>(idx.size()), p.d);
  Vec g(p.d);
  for (size_t i = 0; i < idx.size(); ++i) {
    const Index r = static_cast<Index>(i);
    e.values[r] = p.components[static_cast<size_t>(idx[i])]->eval(x, g.data());
    e.grads.row(r) = g.transpose();
  }
  calls += static_cast<long long>(idx.size());
  return e;
}

Vec default_x0(const SaddleProblem& p) { return p.domain_x.center(p.d, p.geom_x); }
Vec default_y0(const SaddleProblem& p) { return p.domain_y.center(p.n, p.geom_y); }

std::string to_string(Sampling s) { return s == Sampling::Uniform ? "uniform" : "importance"; }

Prepared prepare_method(const SaddleProblem& p, const MethodSetup& setup) {
  SamplingPlan plan = setup.sampling == Sampling::Uniform || setup.kind == ScheduleKind::FullVector
                          ? make_plan_uniform(p.partition)
                          : make_plan_importance(p.partition, setup.kind);
  ScheduleConstants c = schedule_constants(p, plan);
  if (setup.kind == ScheduleKind::FullVector) c.N = 1;
  Regime r = setup.regime ? *setup.regime : default_regime(p, setup.kind);
  return {plan, make_schedule(setup.kind, r, c, setup.schedule)};
}

void WeightedAverage::add(const Vec& v, Real a) {
  if (avg_.size() == 0) avg_ = Vec::Zero(v.size());
  W_ += a;
  if (W_ > 0) avg_ += static_cast<double>(a / W_) * (v - avg_);
}

Vec table_primal_estimate(const Vec& cached, const RowMat& rows_prev, const Vec& y_new_block,
                          const RowMat& rows_stale, const Vec& y_stale_block, double weight) {
  if (weight == 0) return cached;
  return cached + weight * (rows_prev.transpose() * y_new_block - rows_stale.transpose() * y_stale_block);
}

Vec table_primal_estimate(const SaddleProblem& p, const Vec& cached, const IndexList& block, const Vec& x_prev,
                          const Vec& y_new_block, const Vec& x_stale, const Vec& y_stale_block, double weight,
                          long long& calls) {
  BlockEval now = eval_block(p, x_prev, block, calls);
  BlockEval old = eval_block(p, x_stale, block, calls);
  return table_primal_estimate(cached, now.grads, y_new_block, old.grads, y_stale_block, weight);
}

Vec table_dual_estimate(const Vec& fhat_k, const IndexList& block, const Vec& f_prev_block,
                        const Vec& fhat_prev_block, double weight) {
  Vec f = fhat_k;
  if (weight == 0) return f;
  for (size_t i = 0; i < block.size(); ++i) {
    const Index r = static_cast<Index>(i);
    f[block[i]] += weight * (f_prev_block[r] - fhat_prev_block[r]);
  }
  return f;
}

Vec primal_prox(const SaddleProblem& p, const Vec& g, Real a, Real c, const Vec& theta) {
  return prox_from_gradient(Geometry{p.geom_x}, p.domain_x, g, static_cast<double>(a / c), p.phi, 1.0, theta);
}

Vec dual_prox(const SaddleProblem& p, const Vec& fbar, Real a, Real c, const Vec& theta) {
  return prox_from_gradient(Geometry{p.geom_y}, p.domain_y, -fbar, static_cast<double>(a / c), p.psi, 1.0, theta);
}

Vec gather(const Vec& v, const IndexList& idx) {
  Vec out(static_cast<Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = v[idx[i]];
  return out;
}

void scatter(Vec& v, const IndexList& idx, const Vec& block) {
  for (size_t i = 0; i < idx.size(); ++i) v[idx[i]] = block[static_cast<Index>(i)];
}

DualBlocks::DualBlocks(const SaddleProblem& p) : geom{p.geom_y} {
  if (!p.dual_separable) throw SeparabilityError("the dual domain and penalty do not factor over the blocks");
  for (Index J = 0; J < p.N; ++J) {
    const IndexList& b = p.block(J);
    domain.push_back(p.N == 1 ? p.domain_y : p.domain_y.restrict(b));
    psi.push_back(p.psi.restrict(b));
  }
}

Vec DualBlocks::prox(Index J, const Vec& fJ, Real a, Real c, const Vec& anchor) const {
  const size_t j = static_cast<size_t>(J);
  return prox_from_gradient(geom, domain[j], -fJ, static_cast<double>(a / c), psi[j], 1.0,
                            geom.generator_gradient(anchor));
}

}  // namespace dlsp
