#pragma once

#include "dlsp/solver_common.hpp"

namespace dlsp {

struct Comparator {
  enum class Source { SaddleOracle, User, BestResponse };
  Vec u, v;
  Source source = Source::User;
};

// L(x, v) - L(u, y). Negative values are possible for arbitrary comparators.
double gap(const SaddleProblem& p, const Vec& x, const Vec& y, const Vec& u, const Vec& v);
double gap(const SaddleProblem& p, const Vec& x, const Vec& y, const Comparator& c);

struct BestResponseOptions {
  Index inner_max_iterations = 200000;
  double inner_tolerance = 1e-14;  // relative change of the inner objective
};

struct BestResponse {
  double value = 0;       // sup_v L(x, v) - inf_u L(u, y)
  double sup_value = 0;   // sup_v L(x, v)
  double inf_value = 0;   // inf_u L(u, y), an upper estimate when the inner solve is iterative
  Vec u, v;               // the maximizing v and minimizing u
  Index inner_iterations = 0;
};

// Best responses on both sides. Closed forms cover strongly concave psi and
// linear maximization over compact or bounded-by-dual_bound sets; the primal
// side uses a closed form when every active component is affine and an
// accelerated Bregman proximal gradient method otherwise.
// An orthant Y with psi = 0 is capped at the problem's finite dual bounds.
BestResponse best_response(const SaddleProblem& p, const Vec& x, const Vec& y, const BestResponseOptions& opt = {});
double best_response_gap(const SaddleProblem& p, const Vec& x, const Vec& y, const BestResponseOptions& opt = {});

struct SaddleOracleOptions {
  double tolerance = 0;  // 0 picks 1e-10 when mu, nu > 0 and 1e-8 otherwise
  Index max_iterations = 2000000;
  Index check_every = 25;
};

// Reference saddle point from restarted runs of the full-vector method.
// A restart from the current best point happens whenever the best-response
// gap halves relative to the previous restart.
Comparator saddle_oracle(const ProblemPtr& p, const SaddleOracleOptions& opt = {});

}  // namespace dlsp
