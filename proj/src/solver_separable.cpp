#include "dlsp/solver_separable.hpp"

#include <algorithm>

namespace dlsp {

SeparableSolver::SeparableSolver(ProblemPtr p, Prepared method, std::uint64_t seed)
    : SeparableSolver(p, std::move(method), seed, default_x0(*p), default_y0(*p)) {}

SeparableSolver::SeparableSolver(ProblemPtr p, Prepared method, std::uint64_t seed, Vec x0, Vec y0)
    : p_(std::move(p)), sched_(std::move(method.schedule)), plan_(std::move(method.plan)), sampler_(plan_),
      rng_(seed), blocks_(*p_), gx_{p_->geom_x}, x0_(std::move(x0)), y0_(std::move(y0)) {
  if (plan_.N() != p_->N) throw DomainError("sampling plan does not match the partition");
  if (!p_->domain_x.contains(x0_) || !p_->domain_y.contains(y0_))
    throw DomainError("starting point outside the domain");
  x_ = x0_;
  y_ = y0_;
  const size_t N = static_cast<size_t>(p_->N);
  xhat_.assign(N, x0_);
  c_block_.assign(N, Vec::Zero(p_->d));
  c_ = Vec::Zero(p_->d);
  for (Index I = 0; I < p_->N; ++I) {
    BlockEval e = eval_block(*p_, x0_, p_->block(I), calls_.init);
    c_block_[static_cast<size_t>(I)] = e.grads.transpose() * gather(y0_, p_->block(I));
    c_ += c_block_[static_cast<size_t>(I)];
  }
  agg_ = gx_.generator_gradient(x0_);
}

Vec SeparableSolver::previous_dual_block(Index J) const {
  return J == lag_Q_ ? lag_y_ : gather(y_, p_->block(J));
}

void SeparableSolver::step() {
  SeparableDraws dr;
  dr.P = sampler_.P(rng_);
  dr.Q = sampler_.Q(rng_);
  dr.R = sampler_.R(rng_);
  step(dr);
}

void SeparableSolver::step(const SeparableDraws& dr) {
  for (Index b : {dr.P, dr.Q, dr.R})
    if (b < 0 || b >= p_->N) throw DomainError("block draw out of range");
  const Index k = k_ + 1;
  sched_.extend_to(k);
  const Real ak = sched_.a(k), akm1 = sched_.a(k - 1), Akm1 = sched_.A(k - 1);
  const Regime& rg = sched_.regime();
  const long long before = calls_.main, before_cache = calls_.cache;

  // Replay ybar_{k-1,P} from f_P(x_{k-1}) and the anchor y_{k-2,P}.
  const IndexList& BP = p_->block(dr.P);
  BlockEval now = eval_block(*p_, x_, BP, calls_.main);
  Vec y_prev2 = previous_dual_block(dr.P);
  if (k == 1) {
    replay_ = gather(y0_, BP);
  } else {
    const Real Akm2 = sched_.A(k - 2);
    replay_ = blocks_.prox(dr.P, now.values, akm1, Akm2 * rg.nu + rg.nu0, y_prev2);
  }
  const Vec& x_stale = dr.P == lag_R_ ? lag_x_ : xhat_[static_cast<size_t>(dr.P)];
  BlockEval stale = eval_block(*p_, x_stale, BP, calls_.main);
  const double wtP = static_cast<double>(akm1 / (plan_.p[dr.P] * ak));
  gbar_ = table_primal_estimate(c_, now.grads, replay_, stale.grads, y_prev2, wtP);

  const double wP = sched_.wP(k);
  Vec theta_x = gx_.generator_gradient(x_);
  if (wP > 0) theta_x = (1.0 - wP) * theta_x + wP * agg_;
  Vec xk = primal_prox(*p_, gbar_, ak, Akm1 * rg.mu + rg.mu0, theta_x);

  // Single-block dual update with exact values at x_k.
  const IndexList& BQ = p_->block(dr.Q);
  BlockEval eq = eval_block(*p_, xk, BQ, calls_.main);
  lag_Q_ = dr.Q;
  lag_y_ = gather(y_, BQ);
  scatter(y_, BQ, blocks_.prox(dr.Q, eq.values, ak, Akm1 * rg.nu + rg.nu0, lag_y_));

  // Primal table refresh on block R; reuse the block-Q rows when R = Q.
  const IndexList& BR = p_->block(dr.R);
  const size_t r = static_cast<size_t>(dr.R);
  RowMat rows_R = dr.R == dr.Q ? std::move(eq.grads) : eval_block(*p_, xk, BR, calls_.main).grads;
  lag_R_ = dr.R;
  lag_x_ = std::move(xhat_[r]);
  xhat_[r] = xk;
  agg_ += plan_.gamma[dr.R] * (gx_.generator_gradient(xk) - gx_.generator_gradient(lag_x_));

  auto refresh = [&](Index I, const RowMat& rows) {
    Vec fresh = rows.transpose() * gather(y_, p_->block(I));
    Vec& old = c_block_[static_cast<size_t>(I)];
    c_ += fresh - old;
    old = std::move(fresh);
  };
  refresh(dr.R, rows_R);
  if (dr.Q != dr.R)
    refresh(dr.Q, eval_block(*p_, xhat_[static_cast<size_t>(dr.Q)], BQ, calls_.cache).grads);

  x_ = std::move(xk);
  k_ = k;
  draws_ = dr;
  last_calls_ = calls_.main - before;
  last_cache_calls_ = calls_.cache - before_cache;
  xavg_.add(x_, ak);
  yavg_.add(y_, ak);
}

void SeparableSolver::run(Index iterations) {
  for (Index i = 0; i < iterations; ++i) step();
}

Vec SeparableSolver::recompute_cached_product() {
  Vec c = Vec::Zero(p_->d);
  for (Index I = 0; I < p_->N; ++I) {
    BlockEval e = eval_block(*p_, xhat_[static_cast<size_t>(I)], p_->block(I), calls_.diag);
    c += e.grads.transpose() * gather(y_, p_->block(I));
  }
  return c;
}

Vec SeparableSolver::materialize_ybar() {
  if (k_ == 0) return y0_;
  const Regime& rg = sched_.regime();
  const Real stiff = sched_.A(k_ - 1) * rg.nu + rg.nu0;
  Vec ybar = y_;
  for (Index J = 0; J < p_->N; ++J) {
    if (J == lag_Q_) continue;
    const IndexList& B = p_->block(J);
    Vec f = eval_values(*p_, x_, B, calls_.diag);
    scatter(ybar, B, blocks_.prox(J, f, sched_.a(k_), stiff, gather(y_, B)));
  }
  return ybar;
}

Index sample_output_index(Schedule& schedule, Index t, std::mt19937_64& g) {
  if (t < 1) throw DomainError("output index needs t >= 1");
  schedule.extend_to(t);
  const Real At = schedule.A(t);
  const Real u = std::uniform_real_distribution<long double>(0.0L, 1.0L)(g) * At;
  Index lo = 1, hi = t;  // smallest k with A_k > u
  while (lo < hi) {
    const Index mid = lo + (hi - lo) / 2;
    if (schedule.A(mid) > u)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

SeparableOutput run_random_output(SeparableSolver& solver, Index t, std::uint64_t output_seed) {
  std::mt19937_64 g(output_seed);
  Schedule s = solver.schedule();
  SeparableOutput out;
  out.t_hat = sample_output_index(s, t, g);
  if (solver.k() > out.t_hat) throw DomainError("solver already past the sampled output index");
  solver.run(out.t_hat - solver.k());
  out.x = solver.x();
  out.y = solver.materialize_ybar();
  return out;
}

}  // namespace dlsp
