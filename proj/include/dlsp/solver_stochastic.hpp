#pragma once

#include <random>

#include "dlsp/solver_common.hpp"

namespace dlsp {

struct StochasticDraws {
  Index P = 0, Q = 0, R = 0, S = 0;
  bool whole_dual_refresh = false;
};

// Variance-reduced method with primal tables (xhat_I, ghat), dual values fhat
// and dual table yhat. Per iteration it draws P, Q, R, S from the plan and
// touches O(n/N) components, plus n when the whole dual table is refreshed.
//
// Historic kinds regularize toward the table anchors with weights wP, wD from
// the schedule. When the dual side does not factor over blocks the blockwise
// yhat refresh is replaced by a whole-vector refresh with probability 1/N.
class StochasticSolver {
 public:
  StochasticSolver(ProblemPtr p, Prepared method, std::uint64_t seed, Vec x0, Vec y0);
  StochasticSolver(ProblemPtr p, Prepared method, std::uint64_t seed);

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
  const SamplingPlan& plan() const { return plan_; }
  const SaddleProblem& problem() const { return *p_; }
  const StochasticDraws& last_draws() const { return draws_; }
  bool whole_dual_fallback() const { return whole_fallback_; }
  // Calls spent in the last step.
  long long last_step_calls() const { return last_calls_; }

  const Vec& xhat(Index I) const { return xhat_[static_cast<size_t>(I)]; }
  const Vec& yhat() const { return yhat_; }
  const Vec& fhat() const { return fhat_; }

  // Incrementally maintained ghat'yhat and sum_I gamma_I grad gen(xhat_I).
  const Vec& cached_product() const { return c_; }
  const Vec& anchor_aggregate() const { return agg_; }
  // From-scratch versions; the product costs n calls on the diag counter.
  Vec recompute_cached_product();
  Vec recompute_anchor_aggregate() const;

 private:
  void refresh_block_product(Index I, const RowMat& rows);

  ProblemPtr p_;
  Schedule sched_;
  SamplingPlan plan_;
  BlockSampler sampler_;
  std::mt19937_64 rng_;
  Geometry gx_, gy_;
  bool whole_fallback_ = false;

  Vec x0_, y0_, x_, y_;
  std::vector<Vec> xhat_;
  Index lag_R_ = -1;  // block whose xhat changed in the last step, old value in lag_x_
  Vec lag_x_;
  Vec yhat_;
  Index lag_S_ = -1;  // -2 marks a whole-vector refresh, old table in lag_y_
  Vec lag_y_;
  Vec fhat_;
  std::vector<Vec> c_block_;
  Vec c_, agg_;

  WeightedAverage xavg_, yavg_;
  OracleCounter calls_;
  StochasticDraws draws_;
  long long last_calls_ = 0;
  Index k_ = 0;
};

}  // namespace dlsp
