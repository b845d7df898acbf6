#pragma once

#include "dlsp/solver_common.hpp"

namespace dlsp {

// Deterministic full-vector method: extrapolated primal gradient
//   gbar = J(x_{k-1})'y_{k-1} + (a_{k-1}/a_k)(J(x_{k-1})'y_{k-1} - J(x_{k-2})'y_{k-2})
// and exact dual values f(x_k). Each iteration queries every component once.
class FullSolver {
 public:
  FullSolver(ProblemPtr p, Schedule schedule, Vec x0, Vec y0);
  FullSolver(ProblemPtr p, Schedule schedule);

  void step();
  void run(Index iterations);

  Index k() const { return k_; }
  const Vec& x() const { return x_; }
  const Vec& y() const { return y_; }
  const Vec& x0() const { return x0_; }
  const Vec& y0() const { return y0_; }
  const Vec& x_average() const { return xavg_.value(); }
  const Vec& y_average() const { return yavg_.value(); }
  const OracleCounter& calls() const { return calls_; }
  const Schedule& schedule() const { return sched_; }
  const SaddleProblem& problem() const { return *p_; }

  // Estimate the next step would use.
  Vec extrapolated_gradient() const;

 private:
  ProblemPtr p_;
  mutable Schedule sched_;  // extended lazily
  IndexList all_;
  Geometry gx_, gy_;
  Vec x0_, y0_, x_, y_;
  Vec v_, v_prev_;  // J(x_k)'y_k and J(x_{k-1})'y_{k-1}
  WeightedAverage xavg_, yavg_;
  OracleCounter calls_;
  Index k_ = 0;
};

}  // namespace dlsp
