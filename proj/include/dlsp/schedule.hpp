#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dlsp/problem.hpp"

namespace dlsp {

using Real = long double;  // schedule sums grow geometrically; double overflows near k ~ 2000

enum class ScheduleKind {
  FullVector,             // deterministic full-vector method
  StochasticHistoric,     // tables + historical regularization
  StochasticReplacement,  // tables + tuned replacement probabilities
  SeparableHistoric,      // single-block dual updates + historical regularization
  SeparableReplacement,   // single-block dual updates + tuned replacement probabilities
};

std::string to_string(ScheduleKind k);

struct Regime {
  double mu = 0, nu = 0;    // moduli actually exploited (0 turns a side off)
  double mu0 = 1, nu0 = 1;  // base proximal weights, always positive
  bool mu_positive() const { return mu > 0; }
  bool nu_positive() const { return nu > 0; }
};

// Default regime for a problem and method: the problem's moduli, mu0 = 1,
// nu0 = 1 (or mu0 / N for the separable methods).
Regime default_regime(const SaddleProblem& p, ScheduleKind kind);

struct SamplingPlan {
  Vec p, q, r, s, gamma;
  double G_p = 0, L_pg = 0, G_qg = 0, G_ps = 0, L_pr = 0, G_qr = 0;
  Index N() const { return p.size(); }
};

SamplingPlan make_plan_uniform(const BlockPartition& part);
SamplingPlan make_plan_importance(const BlockPartition& part, ScheduleKind kind);
// Fills the derived constants of a plan from the block constants.
void compute_plan_constants(SamplingPlan& plan, const BlockPartition& part);

struct ScheduleConstants {
  Index N = 1;
  double G = 0, L = 0;                                      // aggregate
  double G_p = 0, L_pg = 0, G_qg = 0, G_ps = 0, L_pr = 0, G_qr = 0;  // plan derived
  double min_r = 1, min_s = 1;
};

ScheduleConstants schedule_constants(const SaddleProblem& p, const SamplingPlan& plan);

struct ScheduleRule {
  ScheduleKind kind = ScheduleKind::FullVector;
  Index N = 1;
  Real a1 = 0;
  // Each positive entry contributes a candidate to the min defining a_k, k >= 2.
  Real alpha = 0;   // alpha * A_{k-1}
  Real poly = 0;    // poly * k
  Real cap = 0;     // constant cap
  Real growth = 0;  // (1 + growth) * a_{k-1}
  double wP = 0, wD = 0;
  bool wP_switch = false;  // drop wP once the polynomial branch binds
};

class Schedule {
 public:
  Schedule() = default;
  Schedule(ScheduleRule rule, Regime regime, ScheduleConstants consts);

  void extend_to(Index k);
  Index size() const { return static_cast<Index>(a_.size()) - 1; }  // largest generated k
  Real a(Index k) const { return at(a_, k); }
  Real A(Index k) const { return at(A_, k); }
  double wP(Index k) const { return at(wP_, k); }
  double wD(Index k) const { return at(wD_, k); }
  Index switch_index() const { return kstar_; }

  const ScheduleRule& rule() const { return rule_; }
  const Regime& regime() const { return regime_; }
  const ScheduleConstants& constants() const { return consts_; }
  ScheduleKind kind() const { return rule_.kind; }
  std::string describe() const;

 private:
  template <class T>
  T at(const std::vector<T>& v, Index k) const {
    if (k < 0 || k >= static_cast<Index>(v.size()))
      throw DomainError("schedule index " + std::to_string(k) + " not generated");
    return v[static_cast<size_t>(k)];
  }

  ScheduleRule rule_;
  Regime regime_;
  ScheduleConstants consts_;
  std::vector<Real> a_, A_;
  std::vector<double> wP_, wD_;
  Index kstar_ = 0;
};

struct ScheduleOptions {
  Index horizon = 10000;
  std::optional<double> alpha;  // user override; skips the search
  bool switch_weights = true;   // false keeps wP constant in the (mu>0, nu=0) regime
};

// Closed-form geometric rate for the full-vector method in the strongly
// convex-concave regime: min{sqrt(mu nu)/(4G), mu/(4 sqrt2 L)}.
double full_theory_alpha(const Regime& r, const ScheduleConstants& c);

Schedule make_schedule(ScheduleKind kind, const Regime& regime, const ScheduleConstants& consts,
                       const ScheduleOptions& opt = {});

struct Violation {
  std::string condition;
  Index k = 0;
  double lhs = 0, rhs = 0;
};

struct CertReport {
  bool ok = true;
  Index horizon = 0;
  double max_violation = 0;  // max relative excess lhs/rhs - 1 over violated conditions
  bool divergent = false;    // a decay series does not converge
  std::map<std::string, Index> counts;
  std::vector<Violation> first;  // up to 16 examples
  std::string summary() const;
};

CertReport certify_schedule(const Schedule& s, ScheduleKind kind, Index horizon);

// Draws block indices from the four distributions of a plan.
class BlockSampler {
 public:
  explicit BlockSampler(const SamplingPlan& plan);
  Index P(std::mt19937_64& g) { return static_cast<Index>(p_(g)); }
  Index Q(std::mt19937_64& g) { return static_cast<Index>(q_(g)); }
  Index R(std::mt19937_64& g) { return static_cast<Index>(r_(g)); }
  Index S(std::mt19937_64& g) { return static_cast<Index>(s_(g)); }

 private:
  std::discrete_distribution<int> p_, q_, r_, s_;
};

}  // namespace dlsp
