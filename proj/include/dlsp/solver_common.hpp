#pragma once

#include <cstdint>
#include <optional>

#include "dlsp/geometry.hpp"
#include "dlsp/schedule.hpp"

namespace dlsp {

// Component-oracle counts. One call is one evaluation of a pair (f_j, grad f_j).
struct OracleCounter {
  long long main = 0;   // per-iteration solver work
  long long init = 0;   // setup before the first iteration
  long long cache = 0;  // separable method: cache deltas for the updated dual block
  long long diag = 0;   // diagnostics and output materialization, never part of the budget
  long long solver_total() const { return main + init + cache; }
};

Vec eval_values(const SaddleProblem& p, const Vec& x, const IndexList& idx, long long& calls);
BlockEval eval_block(const SaddleProblem& p, const Vec& x, const IndexList& idx, long long& calls);

// Default starting point: the relative-interior centers of X and Y.
Vec default_x0(const SaddleProblem& p);
Vec default_y0(const SaddleProblem& p);

enum class Sampling { Uniform, Importance };

std::string to_string(Sampling s);

struct MethodSetup {
  ScheduleKind kind = ScheduleKind::FullVector;
  Sampling sampling = Sampling::Importance;
  std::optional<Regime> regime;  // defaults to default_regime(problem, kind)
  ScheduleOptions schedule;
};

struct Prepared {
  SamplingPlan plan;
  Schedule schedule;
};

// Builds the sampling plan and the certified default schedule for a method.
Prepared prepare_method(const SaddleProblem& p, const MethodSetup& setup);

// Running a-weighted average of iterates.
class WeightedAverage {
 public:
  void add(const Vec& v, Real a);
  const Vec& value() const { return avg_; }
  Real weight() const { return W_; }

 private:
  Vec avg_;
  Real W_ = 0;
};

// Variance-reduced primal estimate shared by the table-based methods:
//   cached + weight * sum_{i in block} (y_new_i grad f_i(x_prev) - y_stale_i grad f_i(x_stale)).
// The two gradient sets cost 2|block| calls.
Vec table_primal_estimate(const SaddleProblem& p, const Vec& cached, const IndexList& block, const Vec& x_prev,
                          const Vec& y_new_block, const Vec& x_stale, const Vec& y_stale_block, double weight,
                          long long& calls);

// Same estimate when the rows at x_prev are already evaluated.
Vec table_primal_estimate(const Vec& cached, const RowMat& rows_prev, const Vec& y_new_block,
                          const RowMat& rows_stale, const Vec& y_stale_block, double weight);

// Dual estimate: fhat_k plus weight * (f_Q(x_{k-1}) - fhat_{k-1,Q}) on block Q.
Vec table_dual_estimate(const Vec& fhat_k, const IndexList& block, const Vec& f_prev_block,
                        const Vec& fhat_prev_block, double weight);

// Primal step: argmin a<g,x> + a phi(x) + (c/2) D(x; anchors summarized by theta).
// Only a/c matters, so both stay in long double until their ratio is formed.
Vec primal_prox(const SaddleProblem& p, const Vec& g, Real a, Real c, const Vec& theta);
// Dual step: argmax a<y,fbar> - a psi(y) - (c/2) D(y; anchors summarized by theta).
Vec dual_prox(const SaddleProblem& p, const Vec& fbar, Real a, Real c, const Vec& theta);

Vec gather(const Vec& v, const IndexList& idx);
void scatter(Vec& v, const IndexList& idx, const Vec& block);

// Restrictions of (Y, psi, geometry) to each dual block, for blockwise dual updates.
struct DualBlocks {
  std::vector<Domain> domain;
  std::vector<ProxFunction> psi;
  Geometry geom;
  explicit DualBlocks(const SaddleProblem& p);
  Vec prox(Index J, const Vec& fJ, Real a, Real c, const Vec& anchor) const;
};

}  // namespace dlsp
