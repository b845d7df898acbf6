#include "dlsp/solver_full.hpp"

#include <numeric>

namespace dlsp {

namespace {

IndexList all_indices(Index n) {
  IndexList idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

}  // namespace

FullSolver::FullSolver(ProblemPtr p, Schedule schedule) : FullSolver(p, std::move(schedule), default_x0(*p), default_y0(*p)) {}

FullSolver::FullSolver(ProblemPtr p, Schedule schedule, Vec x0, Vec y0)
    : p_(std::move(p)), sched_(std::move(schedule)), gx_{p_->geom_x}, gy_{p_->geom_y}, x0_(std::move(x0)),
      y0_(std::move(y0)) {
  if (!p_->domain_x.contains(x0_) || !p_->domain_y.contains(y0_))
    throw DomainError("starting point outside the domain");
  x_ = x0_;
  y_ = y0_;
  all_ = all_indices(p_->n);
  BlockEval e = eval_block(*p_, x_, all_, calls_.init);
  v_ = e.grads.transpose() * y_;
  v_prev_ = v_;  // negative indices take the initial value
}

Vec FullSolver::extrapolated_gradient() const {
  const Index k = k_ + 1;
  sched_.extend_to(k);
  const double ratio = static_cast<double>(sched_.a(k - 1) / sched_.a(k));
  return v_ + ratio * (v_ - v_prev_);
}

void FullSolver::step() {
  const Index k = k_ + 1;
  sched_.extend_to(k);
  const Real ak = sched_.a(k), Akm1 = sched_.A(k - 1);
  const Regime& rg = sched_.regime();

  Vec g = extrapolated_gradient();
  Vec xk = primal_prox(*p_, g, ak, Akm1 * rg.mu + rg.mu0, gx_.generator_gradient(x_));

  BlockEval e = eval_block(*p_, xk, all_, calls_.main);
  Vec yk = dual_prox(*p_, e.values, ak, Akm1 * rg.nu + rg.nu0, gy_.generator_gradient(y_));

  v_prev_ = std::move(v_);
  v_ = e.grads.transpose() * yk;
  x_ = std::move(xk);
  y_ = std::move(yk);
  k_ = k;
  xavg_.add(x_, ak);
  yavg_.add(y_, ak);
}

void FullSolver::run(Index iterations) {
  for (Index i = 0; i < iterations; ++i) step();
}

}  // namespace dlsp
