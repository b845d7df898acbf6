#include <cmath>
#include <random>

#include "doctest.h"
#include "dlsp/schedule.hpp"

using namespace dlsp;

namespace {

BlockPartition partition_from(const Vec& G, const Vec& L) {
  BlockPartition part;
  part.blocks = BlockPartition::contiguous(G.size(), G.size());
  part.block_of.resize(static_cast<size_t>(G.size()));
  for (Index I = 0; I < G.size(); ++I) part.block_of[static_cast<size_t>(I)] = I;
  part.block_G = G;
  part.block_L = L;
  part.block_lambda = (G.array().square() + L.array().square()).sqrt().matrix();
  return part;
}

// Direct recomputation of the plan constants from their definitions.
void check_plan_constants(const SamplingPlan& pl, const BlockPartition& part) {
  const Vec& G = part.block_G;
  const Vec& L = part.block_L;
  double gp = 0, lpg = 0, gqg = 0, gps = 0, lpr = 0, gqr = 0;
  for (Index I = 0; I < pl.N(); ++I) {
    auto safe = [](double num, double den) { return num == 0 ? 0.0 : num / den; };
    gp = std::max(gp, safe(G[I] * G[I], pl.p[I]));
    lpg = std::max(lpg, safe(L[I] * L[I], pl.p[I] * pl.gamma[I]));
    gqg = std::max(gqg, safe(G[I] * G[I], pl.q[I] * pl.gamma[I]));
    gps = std::max(gps, safe(G[I] * G[I], pl.p[I] * pl.s[I] * pl.s[I]));
    lpr += safe(L[I] * L[I], pl.p[I] * pl.r[I] * pl.r[I]);
    gqr += safe(G[I] * G[I], pl.q[I] * pl.r[I] * pl.r[I]);
  }
  CHECK(pl.G_p == doctest::Approx(std::sqrt(gp)).epsilon(1e-10));
  CHECK(pl.L_pg == doctest::Approx(std::sqrt(lpg)).epsilon(1e-10));
  CHECK(pl.G_qg == doctest::Approx(std::sqrt(gqg)).epsilon(1e-10));
  CHECK(pl.G_ps == doctest::Approx(std::sqrt(gps)).epsilon(1e-10));
  CHECK(pl.L_pr == doctest::Approx(std::sqrt(lpr)).epsilon(1e-10));
  CHECK(pl.G_qr == doctest::Approx(std::sqrt(gqr)).epsilon(1e-10));
  for (const Vec* v : {&pl.p, &pl.q, &pl.r, &pl.s, &pl.gamma}) {
    CHECK(std::abs(v->sum() - 1.0) <= 1e-12);
    CHECK((v->array() >= 0).all());
  }
}

ScheduleConstants constants_from(const BlockPartition& part, const SamplingPlan& pl, double G, double L) {
  ScheduleConstants c;
  c.N = pl.N();
  c.G = G;
  c.L = L;
  c.G_p = pl.G_p;
  c.L_pg = pl.L_pg;
  c.G_qg = pl.G_qg;
  c.G_ps = pl.G_ps;
  c.L_pr = pl.L_pr;
  c.G_qr = pl.G_qr;
  c.min_r = pl.r.minCoeff();
  c.min_s = pl.s.minCoeff();
  (void)part;
  return c;
}

}  // namespace

TEST_CASE("symmetric plan") {
  auto part = partition_from(Vec::Ones(2), Vec::Ones(2));
  auto pl = make_plan_importance(part, ScheduleKind::StochasticHistoric);
  CHECK(pl.p.isApprox(Vec::Constant(2, 0.5)));
  CHECK(pl.gamma.isApprox(Vec::Constant(2, 0.5)));
  CHECK(pl.G_p == doctest::Approx(std::sqrt(2.0)));
  check_plan_constants(pl, part);
}

TEST_CASE("importance plan proportional to lambda") {
  // lambda = (3, 1) with G = (3, 1), L = (0, 0) would zero L; use a mixed split.
  Vec G(2), L(2);
  G << 3.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  L = G;
  auto part = partition_from(G, L);
  CHECK(part.block_lambda[0] == doctest::Approx(3.0));
  auto pl = make_plan_importance(part, ScheduleKind::StochasticHistoric);
  CHECK(pl.p[0] == doctest::Approx(0.75));
  CHECK(pl.p[1] == doctest::Approx(0.25));
  CHECK(pl.gamma.isApprox(pl.p));
  double expect = std::sqrt(std::max(L[0] * L[0] / (9.0 / 16), L[1] * L[1] / (1.0 / 16)));
  CHECK(pl.L_pg == doctest::Approx(expect));
  check_plan_constants(pl, part);
}

TEST_CASE("uniform plan matches the uniform-sampling column") {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (Index N : {1, 3, 8}) {
    Vec G(N), L(N);
    for (Index I = 0; I < N; ++I) { G[I] = u(g); L[I] = u(g); }
    auto part = partition_from(G, L);
    auto pl = make_plan_uniform(part);
    CHECK(pl.G_p == doctest::Approx(std::sqrt(static_cast<double>(N)) * G.maxCoeff()));
    check_plan_constants(pl, part);
  }
}

TEST_CASE("importance plans satisfy their proportionality and floors") {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  const Index N = 6;
  Vec G(N), L(N);
  for (Index I = 0; I < N; ++I) { G[I] = u(g); L[I] = u(g); }
  auto part = partition_from(G, L);
  Vec lam = part.block_lambda;
  for (auto kind : {ScheduleKind::StochasticHistoric, ScheduleKind::StochasticReplacement,
                    ScheduleKind::SeparableHistoric, ScheduleKind::SeparableReplacement}) {
    INFO(to_string(kind));
    auto pl = make_plan_importance(part, kind);
    check_plan_constants(pl, part);
    bool repl = kind == ScheduleKind::StochasticReplacement || kind == ScheduleKind::SeparableReplacement;
    Vec target = repl ? lam.array().sqrt().matrix() : lam;
    CHECK(pl.p.isApprox(target / target.sum()));
    if (repl) {
      CHECK(pl.r.minCoeff() >= 1.0 / (2 * N) - 1e-15);
      if (kind == ScheduleKind::StochasticReplacement) CHECK(pl.s.minCoeff() >= 1.0 / (2 * N) - 1e-15);
    }
    if (kind == ScheduleKind::SeparableHistoric) CHECK(pl.gamma.isApprox(L / L.sum()));
    if (kind == ScheduleKind::StochasticHistoric) CHECK(pl.q.isApprox(G / G.sum()));
  }
  CHECK_THROWS_AS(make_plan_importance(partition_from(Vec::Zero(3), Vec::Zero(3)), ScheduleKind::StochasticHistoric),
                  DegenerateConstants);
}

TEST_CASE("full-vector constant schedule") {
  ScheduleConstants c;
  c.G = std::sqrt(2.0);
  c.L = 2.0;
  Regime r;  // mu = nu = 0, mu0 = nu0 = 1
  auto s = make_schedule(ScheduleKind::FullVector, r, c);
  // min{1/(4 sqrt2), 1/(4 sqrt2 * 2)}
  const double a = 1.0 / (8 * std::sqrt(2.0));
  CHECK(static_cast<double>(s.a(1)) == doctest::Approx(a));
  for (Index k : {2, 10, 1000, 10000}) CHECK(static_cast<double>(s.a(k)) == doctest::Approx(a));
  CHECK(static_cast<double>(s.A(100)) == doctest::Approx(100 * a));
  CHECK(s.a(0) == 0);
  CHECK(certify_schedule(s, ScheduleKind::FullVector, 10000).ok);
}

TEST_CASE("full-vector geometric schedule at the closed-form rate") {
  ScheduleConstants c;
  c.G = 1.0;
  c.L = 1.0;
  Regime r;
  r.mu = r.nu = 1.0;
  const double alpha = 1.0 / (4 * std::sqrt(2.0));  // min{1/4, 1/(4 sqrt2)}
  CHECK(full_theory_alpha(r, c) == doctest::Approx(alpha));
  ScheduleOptions opt;
  opt.alpha = alpha;
  opt.horizon = 200;
  auto s = make_schedule(ScheduleKind::FullVector, r, c, opt);
  CHECK(static_cast<double>(s.a(1)) == doctest::Approx(alpha));
  auto rep = certify_schedule(s, ScheduleKind::FullVector, 200);
  CHECK_MESSAGE(rep.ok, rep.summary());
  for (Index t = 1; t <= 200; ++t)
    CHECK(s.A(t) >= std::pow(1.0L + alpha, t - 1) * s.a(1) * (1 - 1e-12L));
  // The default search certifies at least the closed-form rate.
  auto d = make_schedule(ScheduleKind::FullVector, r, c);
  CHECK(d.rule().alpha >= alpha * (1 - 1e-12));
}

TEST_CASE("decay series threshold for historic regularization") {
  // With geometric A at rate alpha and w = 1/N the primal decay condition holds
  // exactly when alpha <= 1/(N^2 - 1).
  const Index N = 4;
  ScheduleConstants c;
  c.N = N;  // all other constants zero so only the structural conditions bind
  Regime r;
  r.mu = 1.0;
  auto make = [&](double alpha) {
    ScheduleRule rule;
    rule.kind = ScheduleKind::StochasticHistoric;
    rule.N = N;
    rule.a1 = 1.0L;
    rule.alpha = alpha;
    rule.wP = rule.wD = 1.0 / N;
    return Schedule(rule, r, c);
  };
  auto ok = certify_schedule(make(0.99 / 15), ScheduleKind::StochasticHistoric, 2000);
  CHECK_MESSAGE(ok.ok, ok.summary());
  auto over = certify_schedule(make(1.01 / 15), ScheduleKind::StochasticHistoric, 2000);
  CHECK_FALSE(over.ok);
  CHECK(over.counts.count("primal_decay") == 1);

  auto third = certify_schedule(make(1.0 / (N - 1)), ScheduleKind::StochasticHistoric, 2000);
  CHECK_FALSE(third.ok);
  CHECK(third.counts.count("primal_decay") == 1);  // rho * (1 + alpha) = 1: the series sits on the boundary
  auto one = certify_schedule(make(1.0), ScheduleKind::StochasticHistoric, 2000);
  CHECK_FALSE(one.ok);
  CHECK(one.counts.count("primal_decay") == 1);
}

TEST_CASE("constant schedule certifies trivially for historic kinds") {
  ScheduleConstants c;
  c.N = 5;
  c.G_p = c.L_pg = c.G_qg = 1.0;
  auto s = make_schedule(ScheduleKind::StochasticHistoric, Regime{}, c);
  CHECK(s.a(7) == s.a(1));
  CHECK(certify_schedule(s, ScheduleKind::StochasticHistoric, 10000).ok);
}

TEST_CASE("every default schedule certifies and has the right growth") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  const Index N = 5;
  Vec G(N), L(N);
  for (Index I = 0; I < N; ++I) { G[I] = u(g); L[I] = u(g); }
  auto part = partition_from(G, L);
  for (auto kind : {ScheduleKind::FullVector, ScheduleKind::StochasticHistoric, ScheduleKind::StochasticReplacement,
                    ScheduleKind::SeparableHistoric, ScheduleKind::SeparableReplacement}) {
    auto pl = kind == ScheduleKind::FullVector ? make_plan_uniform(part) : make_plan_importance(part, kind);
    auto c = constants_from(part, pl, G.norm(), L.sum());
    if (kind == ScheduleKind::FullVector) c.N = 1;
    bool sep = kind == ScheduleKind::SeparableHistoric || kind == ScheduleKind::SeparableReplacement;
    for (int mode = 0; mode < 4; ++mode) {
      Regime r;
      r.mu = (mode & 1) ? 0.5 : 0.0;
      r.nu = (mode & 2) ? 0.5 : 0.0;
      if (sep) r.nu0 = r.mu0 / static_cast<double>(N);
      INFO(to_string(kind), " mu=", r.mu, " nu=", r.nu);
      ScheduleOptions opt;
      opt.horizon = 10000;
      auto s = make_schedule(kind, r, c, opt);
      auto rep = certify_schedule(s, kind, 10000);
      CHECK_MESSAGE(rep.ok, rep.summary());
      for (Index k = 1; k <= 10000; ++k) REQUIRE(s.a(k) > 0);
      CHECK(s.A(10000) == doctest::Approx(static_cast<double>(s.A(9999) + s.a(10000))));
      long double r1 = s.A(2000) / s.A(1000), r2 = s.A(4000) / s.A(2000);
      if (mode == 0) {
        CHECK(static_cast<double>(r1) == doctest::Approx(2.0).epsilon(1e-9));
      } else if (mode == 3) {
        CHECK(static_cast<double>(r2) > 2.0 * static_cast<double>(r1));  // geometric, not polynomial
      } else if (mode == 1) {
        // quadratic tail: doubling t multiplies A by about four
        double r3 = static_cast<double>(s.A(10000) / s.A(5000));
        CHECK(r3 == doctest::Approx(4.0).epsilon(0.05));
      } else {
        // nu-only: quadratic phase capped to a linear tail
        // a_1 comes from the first-step bound; the pattern starts at k = 2
        for (Index k = 3; k <= 10000; ++k) REQUIRE(s.a(k) >= s.a(k - 1) * (1 - 1e-15L));
        CHECK(static_cast<double>(r2) >= 2.0 - 1e-9);
        CHECK(static_cast<double>(r2) <= 4.2);
      }
      if (kind == ScheduleKind::StochasticHistoric || kind == ScheduleKind::SeparableHistoric) {
        for (Index k = 1; k <= 10000; ++k) REQUIRE(s.wP(k) <= s.wP(k - 1));
      }
    }
  }
}

TEST_CASE("sampler frequencies") {
  Vec G(4), L(4);
  G << 1, 2, 3, 4;
  L << 4, 1, 0.5, 2;
  auto part = partition_from(G, L);
  auto pl = make_plan_importance(part, ScheduleKind::StochasticReplacement);
  BlockSampler smp(pl);
  std::mt19937_64 g(4);
  const int T = 200000;
  Eigen::Vector4d cp = Eigen::Vector4d::Zero(), cq = cp, cr = cp, cs = cp;
  for (int t = 0; t < T; ++t) {
    cp[smp.P(g)]++;
    cq[smp.Q(g)]++;
    cr[smp.R(g)]++;
    cs[smp.S(g)]++;
  }
  auto within = [&](const Eigen::Vector4d& cnt, const Vec& prob) {
    for (int i = 0; i < 4; ++i) {
      double sd = std::sqrt(T * prob[i] * (1 - prob[i]));
      CHECK(std::abs(cnt[i] - T * prob[i]) <= 3 * sd);
    }
  };
  within(cp, pl.p);
  within(cq, pl.q);
  within(cr, pl.r);
  within(cs, pl.s);
}

TEST_CASE("rate search skips candidates whose A_k overflows before the horizon") {
  ScheduleConstants c;
  c.N = 2;
  c.G_p = c.L_pg = c.G_qg = 1e-3;  // loose conditions: only the cap limits alpha
  Regime r;
  r.mu = r.nu = 1.0;
  ScheduleOptions opt;
  opt.horizon = 60000;  // (1 + 1/4)^60000 is beyond long double
  Schedule s;
  REQUIRE_NOTHROW(s = make_schedule(ScheduleKind::StochasticHistoric, r, c, opt));
  CHECK(s.rule().alpha < 0.25L);
  CHECK(certify_schedule(s, ScheduleKind::StochasticHistoric, 60000).ok);
}
