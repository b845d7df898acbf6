#include "dlsp/solver_stochastic.hpp"

namespace dlsp {

StochasticSolver::StochasticSolver(ProblemPtr p, Prepared method, std::uint64_t seed)
    : StochasticSolver(p, std::move(method), seed, default_x0(*p), default_y0(*p)) {}

StochasticSolver::StochasticSolver(ProblemPtr p, Prepared method, std::uint64_t seed, Vec x0, Vec y0)
    : p_(std::move(p)), sched_(std::move(method.schedule)), plan_(std::move(method.plan)), sampler_(plan_),
      rng_(seed), gx_{p_->geom_x}, gy_{p_->geom_y}, x0_(std::move(x0)), y0_(std::move(y0)) {
  if (plan_.N() != p_->N) throw DomainError("sampling plan does not match the partition");
  if (!p_->domain_x.contains(x0_) || !p_->domain_y.contains(y0_))
    throw DomainError("starting point outside the domain");
  whole_fallback_ = !p_->dual_separable;
  x_ = x0_;
  y_ = y0_;
  const size_t N = static_cast<size_t>(p_->N);
  xhat_.assign(N, x0_);
  yhat_ = y0_;
  fhat_ = Vec::Zero(p_->n);
  c_block_.assign(N, Vec::Zero(p_->d));
  c_ = Vec::Zero(p_->d);
  for (Index I = 0; I < p_->N; ++I) {
    BlockEval e = eval_block(*p_, x0_, p_->block(I), calls_.init);
    scatter(fhat_, p_->block(I), e.values);
    c_block_[static_cast<size_t>(I)] = e.grads.transpose() * gather(y0_, p_->block(I));
    c_ += c_block_[static_cast<size_t>(I)];
  }
  agg_ = gx_.generator_gradient(x0_);
}

void StochasticSolver::refresh_block_product(Index I, const RowMat& rows) {
  Vec fresh = rows.transpose() * gather(yhat_, p_->block(I));
  Vec& old = c_block_[static_cast<size_t>(I)];
  c_ += fresh - old;
  old = std::move(fresh);
}

void StochasticSolver::step() {
  const Index k = k_ + 1;
  sched_.extend_to(k);
  const Real ak = sched_.a(k), akm1 = sched_.a(k - 1), Akm1 = sched_.A(k - 1);
  const Regime& rg = sched_.regime();
  const long long before = calls_.main;

  StochasticDraws dr;
  dr.P = sampler_.P(rng_);
  dr.Q = sampler_.Q(rng_);
  dr.R = sampler_.R(rng_);
  dr.S = sampler_.S(rng_);
  if (whole_fallback_)
    dr.whole_dual_refresh = std::bernoulli_distribution(1.0 / static_cast<double>(p_->N))(rng_);

  // Primal estimate: cached ghat_{k-1}'yhat_{k-1} plus the block-P correction
  // against the stale pair (xhat_{k-2,P}, yhat_{k-2,P}).
  const IndexList& BP = p_->block(dr.P);
  const double wtP = static_cast<double>(akm1 / (plan_.p[dr.P] * ak));
  BlockEval now = eval_block(*p_, x_, BP, calls_.main);
  const Vec& x_stale = dr.P == lag_R_ ? lag_x_ : xhat_[static_cast<size_t>(dr.P)];
  BlockEval stale = eval_block(*p_, x_stale, BP, calls_.main);
  Vec y_stale;
  if (lag_S_ == -2)
    y_stale = gather(lag_y_, BP);
  else if (lag_S_ == dr.P)
    y_stale = lag_y_;
  else
    y_stale = gather(yhat_, BP);
  Vec g = table_primal_estimate(c_, now.grads, gather(y_, BP), stale.grads, y_stale, wtP);

  const double wP = sched_.wP(k);
  Vec theta_x = gx_.generator_gradient(x_);
  if (wP > 0) theta_x = (1.0 - wP) * theta_x + wP * agg_;
  Vec xk = primal_prox(*p_, g, ak, Akm1 * rg.mu + rg.mu0, theta_x);

  // Primal table refresh on block R at x_k.
  const IndexList& BR = p_->block(dr.R);
  const size_t r = static_cast<size_t>(dr.R);
  BlockEval er = eval_block(*p_, xk, BR, calls_.main);
  lag_R_ = dr.R;
  lag_x_ = xhat_[r];
  xhat_[r] = xk;
  agg_ += plan_.gamma[dr.R] * (gx_.generator_gradient(xk) - gx_.generator_gradient(lag_x_));
  Vec fhat_old_R = gather(fhat_, BR);
  scatter(fhat_, BR, er.values);
  refresh_block_product(dr.R, er.grads);

  // Dual estimate: fhat_k plus the block-Q correction at x_{k-1}.
  const IndexList& BQ = p_->block(dr.Q);
  Vec fq = eval_values(*p_, x_, BQ, calls_.main);
  Vec fhat_prev_Q = dr.Q == dr.R ? fhat_old_R : gather(fhat_, BQ);
  const double wtQ = static_cast<double>(akm1 / (plan_.q[dr.Q] * ak));
  Vec fbar = table_dual_estimate(fhat_, BQ, fq, fhat_prev_Q, wtQ);

  const double wD = sched_.wD(k);
  Vec theta_y = gy_.generator_gradient(y_);
  if (wD > 0) theta_y = (1.0 - wD) * theta_y + wD * gy_.generator_gradient(yhat_);
  Vec yk = dual_prox(*p_, fbar, ak, Akm1 * rg.nu + rg.nu0, theta_y);

  // Dual table refresh.
  if (!whole_fallback_) {
    const IndexList& BS = p_->block(dr.S);
    lag_S_ = dr.S;
    lag_y_ = gather(yhat_, BS);
    scatter(yhat_, BS, gather(yk, BS));
    if (dr.S == dr.R)
      refresh_block_product(dr.S, er.grads);
    else
      refresh_block_product(dr.S, eval_block(*p_, xhat_[static_cast<size_t>(dr.S)], BS, calls_.main).grads);
  } else if (dr.whole_dual_refresh) {
    lag_S_ = -2;
    lag_y_ = yhat_;
    yhat_ = yk;
    for (Index I = 0; I < p_->N; ++I) {
      if (I == dr.R)
        refresh_block_product(I, er.grads);
      else
        refresh_block_product(I, eval_block(*p_, xhat_[static_cast<size_t>(I)], p_->block(I), calls_.main).grads);
    }
  } else {
    lag_S_ = -1;
  }

  x_ = std::move(xk);
  y_ = std::move(yk);
  k_ = k;
  draws_ = dr;
  last_calls_ = calls_.main - before;
  xavg_.add(x_, ak);
  yavg_.add(y_, ak);
}

void StochasticSolver::run(Index iterations) {
  for (Index i = 0; i < iterations; ++i) step();
}

Vec StochasticSolver::recompute_cached_product() {
  Vec c = Vec::Zero(p_->d);
  for (Index I = 0; I < p_->N; ++I) {
    BlockEval e = eval_block(*p_, xhat_[static_cast<size_t>(I)], p_->block(I), calls_.diag);
    c += e.grads.transpose() * gather(yhat_, p_->block(I));
  }
  return c;
}

Vec StochasticSolver::recompute_anchor_aggregate() const {
  Vec s = Vec::Zero(p_->d);
  for (Index I = 0; I < p_->N; ++I) s += plan_.gamma[I] * gx_.generator_gradient(xhat_[static_cast<size_t>(I)]);
  return s;
}

}  // namespace dlsp
