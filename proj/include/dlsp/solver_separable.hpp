#pragma once

#include <random>

#include "dlsp/solver_common.hpp"

namespace dlsp {

struct SeparableDraws {
  Index P = 0, Q = 0, R = 0;
};

// Block-coordinate method for dual-separable problems. Each step updates the
// single dual block Q with exact values f_Q(x_k); every other block is frozen.
// The primal estimator replays the virtual full update ybar_{k-1,P} instead of
// storing it.
class SeparableSolver {
 public:
  SeparableSolver(ProblemPtr p, Prepared method, std::uint64_t seed, Vec x0, Vec y0);
  SeparableSolver(ProblemPtr p, Prepared method, std::uint64_t seed);

  void step();
  // Step with prescribed draws, for replay audits and exhaustive enumeration.
  // Does not advance the generator.
  void step(const SeparableDraws& draws);
  void run(Index iterations);

  Index k() const { return k_; }
  const Vec& x() const { return x_; }
  const Vec& y() const { return y_; }
  const Vec& x0() const { return x0_; }
  const Vec& y0() const { return y0_; }
  // Weighted averages of (x_k, y_k). Diagnostic only: the guarantees are
  // stated for the randomly indexed output.
  const Vec& x_average() const { return xavg_.value(); }
  const Vec& y_average() const { return yavg_.value(); }
  const OracleCounter& calls() const { return calls_; }
  const Schedule& schedule() const { return sched_; }
  const SamplingPlan& plan() const { return plan_; }
  const SaddleProblem& problem() const { return *p_; }
  const SeparableDraws& last_draws() const { return draws_; }
  long long last_step_calls() const { return last_calls_; }
  long long last_step_cache_calls() const { return last_cache_calls_; }

  const Vec& xhat(Index I) const { return xhat_[static_cast<size_t>(I)]; }
  const Vec& cached_product() const { return c_; }
  Vec recompute_cached_product();  // n calls on the diag counter
  const Vec& anchor_aggregate() const { return agg_; }

  // ybar_{k-1,P} as replayed in the last step (block of size |B_P|).
  const Vec& last_replay() const { return replay_; }
  // Primal estimate gbar_{k-1} used by the last step.
  const Vec& last_estimate() const { return gbar_; }
  // y_{k-1} restricted to block J, rebuilt from y_k and the lag buffer.
  Vec previous_dual_block(Index J) const;

  // Full virtual update ybar_k: y_k on the updated block, the block prox at
  // x_k anchored at y_{k-1,J} = y_{k,J} elsewhere. Costs up to n diag calls.
  Vec materialize_ybar();

 private:
  ProblemPtr p_;
  Schedule sched_;
  SamplingPlan plan_;
  BlockSampler sampler_;
  std::mt19937_64 rng_;
  DualBlocks blocks_;
  Geometry gx_;

  Vec x0_, y0_, x_, y_;
  std::vector<Vec> xhat_;
  Index lag_R_ = -1;
  Vec lag_x_;
  Index lag_Q_ = -1;  // block updated in the last step, y_{k-1} values in lag_y_
  Vec lag_y_;
  std::vector<Vec> c_block_;
  Vec c_, agg_, replay_, gbar_;

  WeightedAverage xavg_, yavg_;
  OracleCounter calls_;
  SeparableDraws draws_;
  long long last_calls_ = 0, last_cache_calls_ = 0;
  Index k_ = 0;
};

// Draws t_hat in {1..t} with probability a_k / A_t.
Index sample_output_index(Schedule& schedule, Index t, std::mt19937_64& g);

struct SeparableOutput {
  Index t_hat = 0;
  Vec x, y;  // (x_{t_hat}, ybar_{t_hat})
};

// Runs a fresh solver to a random index t_hat drawn from an independent
// stream, then materializes the output pair.
SeparableOutput run_random_output(SeparableSolver& solver, Index t, std::uint64_t output_seed);

}  // namespace dlsp
