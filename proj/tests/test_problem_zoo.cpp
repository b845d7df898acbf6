#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dlsp/gap.hpp"
#include "dlsp/zoo.hpp"

using namespace dlsp;

namespace {

double primal_norm(const SaddleProblem& p, const Vec& v) {
  return p.geom_x == GeometryKind::Euclidean ? v.norm() : v.lpNorm<1>();
}
double primal_dual_norm(const SaddleProblem& p, const Vec& v) {
  return p.geom_x == GeometryKind::Euclidean ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

Vec sample_x(const SaddleProblem& p, std::mt19937_64& g) {
  std::normal_distribution<double> Z(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Vec v(p.d);
  switch (p.domain_x.kind) {
    case DomainKind::Simplex:
      for (Index j = 0; j < p.d; ++j) v[j] = -std::log(U(g) + 1e-300);
      return v / v.sum();
    case DomainKind::Box:
      for (Index j = 0; j < p.d; ++j) v[j] = p.domain_x.lo[j] + U(g) * (p.domain_x.hi[j] - p.domain_x.lo[j]);
      return v;
    default:
      for (Index j = 0; j < p.d; ++j) v[j] = 2 * Z(g);
      return v;
  }
}

// Feasible y with every coordinate inside its dual bound.
Vec sample_y(const SaddleProblem& p, std::mt19937_64& g) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Vec v(p.n);
  for (Index j = 0; j < p.n; ++j) {
    const double D = p.dual_bound.size() == p.n ? p.dual_bound[j] : p.domain_y.coord_bound(j);
    v[j] = std::isfinite(D) ? U(g) * D : U(g);
  }
  if (p.domain_y.kind == DomainKind::Simplex) v /= v.sum();
  return v;
}

// Assumption-1 spot checks on sampled points: component Lipschitz bounds and
// the two block inequalities.
void spot_check(const SaddleProblem& p, std::mt19937_64& g, int samples = 40) {
  if (p.domain_x.kind == DomainKind::Full) return;  // constants are infinite there
  std::normal_distribution<double> Z(0.0, 1.0);
  Vec gx(p.d), gx2(p.d);
  for (int s = 0; s < samples; ++s) {
    const Vec x = sample_x(p, g), x2 = sample_x(p, g);
    const double dx = primal_norm(p, x - x2);
    for (Index j = 0; j < p.n; ++j) {
      const auto& c = *p.components[static_cast<size_t>(j)];
      REQUIRE(std::abs(c.value(x) - c.value(x2)) <= p.comp_G[j] * dx * (1 + 1e-12) + 1e-12);
    }
    const Vec y = sample_y(p, g);
    for (Index J = 0; J < p.N; ++J) {
      Vec sz = Vec::Zero(p.d), sy = Vec::Zero(p.d);
      double zn = 0;
      for (Index j : p.block(J)) {
        const double z = Z(g);
        zn += z * z;
        p.components[static_cast<size_t>(j)]->eval(x, gx.data());
        p.components[static_cast<size_t>(j)]->eval(x2, gx2.data());
        sz += z * gx;
        sy += y[j] * (gx - gx2);
      }
      REQUIRE(primal_dual_norm(p, sz) <= p.partition.block_G[J] * std::sqrt(zn) * (1 + 1e-12) + 1e-12);
      REQUIRE(primal_dual_norm(p, sy) <= p.partition.block_L[J] * dx * (1 + 1e-12) + 1e-12);
    }
  }
}

ProblemPtr two_sample_dro(DualPenalty pen, double nu, double mu) {
  RowMat Z(2, 1);
  Z << 1, -1;
  Vec b(2);
  b << 1, 1;
  DroOptions o;
  o.penalty = pen;
  o.nu = nu;
  o.mu = mu;
  o.radius = 2.0;
  return make_dro(Z, b, o);
}

}  // namespace

TEST_CASE("symmetric two-sample DRO has symmetric weights") {
  auto p = two_sample_dro(DualPenalty::Chi2, 1.0, 1.0);
  Comparator c = saddle_oracle(p);
  CHECK(std::abs(c.u[0]) <= 1e-5);
  CHECK(std::abs(c.v[0] - 0.5) <= 1e-5);
  CHECK(std::abs(c.v[1] - 0.5) <= 1e-5);
}

TEST_CASE("chi-square weights on two samples follow the clipped closed form") {
  for (double nu : {0.2, 1.0, 5.0}) {
    auto p = two_sample_dro(DualPenalty::Chi2, nu, 1.0);
    for (double x : {-1.5, -0.3, 0.0, 0.4, 1.9}) {
      const Vec f = p->values(Vec::Constant(1, x));
      // argmax v.f - (nu/2)||v - 1/2||^2 over the 2-simplex.
      const double v1 = std::clamp(0.5 + (f[0] - f[1]) / (2 * nu), 0.0, 1.0);
      BestResponse br = best_response(*p, Vec::Constant(1, x), Vec::Constant(2, 0.5));
      CHECK(br.v[0] == doctest::Approx(v1).epsilon(1e-12));
      CHECK(br.v[1] == doctest::Approx(1 - v1).epsilon(1e-12));
    }
  }
}

TEST_CASE("a heavy dual penalty recovers ridge ERM") {
  Dataset data = synthetic_regression(6, 2, 3);
  DroOptions o;
  o.penalty = DualPenalty::Chi2;
  o.nu = 1e3;
  o.mu = 0.5;
  o.radius = 5.0;
  auto p = make_dro(data.features, data.targets, o);
  const RowMat& Z = data.features;
  Eigen::MatrixXd H = Z.transpose() * Z / 6.0;
  H.diagonal().array() += 0.5;
  const Vec erm = H.ldlt().solve(Z.transpose() * data.targets / 6.0);
  REQUIRE(erm.cwiseAbs().maxCoeff() < 5.0);
  Comparator c = saddle_oracle(p);
  CHECK((c.u - erm).norm() <= 1e-2);
  CHECK((c.v - Vec::Constant(6, 1.0 / 6)).cwiseAbs().maxCoeff() <= 1e-2);
}

TEST_CASE("KL penalty with equal losses keeps uniform weights") {
  RowMat Z = RowMat::Zero(4, 2);
  Vec b = Vec::Constant(4, 0.7);
  DroOptions o;
  o.penalty = DualPenalty::KL;
  o.nu = 0.3;
  o.radius = 1.0;
  auto p = make_dro(Z, b, o);
  BestResponse br = best_response(*p, Vec::Constant(2, 0.2), Vec::Constant(4, 0.25));
  CHECK((br.v - Vec::Constant(4, 0.25)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("matrix game values") {
  SUBCASE("swap game") {
    RowMat A(2, 2);
    A << 0, 1, 1, 0;
    auto p = make_matrix_game(A);
    CHECK(p->comp_G[0] == 1.0);
    CHECK(p->comp_G[1] == 1.0);
    Comparator c = saddle_oracle(p);
    CHECK(evaluate_lagrangian(*p, c.u, c.v) == doctest::Approx(0.5).epsilon(1e-8));
  }
  SUBCASE("matching pennies") {
    RowMat A(2, 2);
    A << 1, -1, -1, 1;
    auto p = make_matrix_game(A);
    Comparator c = saddle_oracle(p);
    CHECK(std::abs(evaluate_lagrangian(*p, c.u, c.v)) <= 1e-8);
  }
  SUBCASE("random sparse 50x50") {
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> U(-1.0, 1.0), B(0.0, 1.0);
    RowMat A = RowMat::Zero(50, 50);
    for (Index i = 0; i < 50; ++i)
      for (Index j = 0; j < 50; ++j)
        if (B(g) < 0.1) A(i, j) = U(g);
    auto p = make_matrix_game(A);
    for (Index i = 0; i < 50; ++i) CHECK(p->comp_G[i] == A.row(i).cwiseAbs().maxCoeff());
    Comparator c = saddle_oracle(p);
    // Weak duality brackets the value from the payoff matrix alone.
    const double hi = (A * c.u).maxCoeff(), lo = (A.transpose() * c.v).minCoeff();
    CHECK(hi - lo <= 1e-6);
    const double value = evaluate_lagrangian(*p, c.u, c.v);
    CHECK(value >= lo - 1e-12);
    CHECK(value <= hi + 1e-12);
    // Independent cross-check: averaged multiplicative-weights self-play.
    Vec wx = Vec::Ones(50), wy = Vec::Ones(50), ax = Vec::Zero(50), ay = Vec::Zero(50);
    const int T = 20000;
    const double eta = std::sqrt(std::log(50.0) / T);
    for (int t = 0; t < T; ++t) {
      const Vec x = wx / wx.sum(), y = wy / wy.sum();
      ax += x / T;
      ay += y / T;
      wx = wx.cwiseProduct((-eta * (A.transpose() * y)).array().exp().matrix());
      wy = wy.cwiseProduct((eta * (A * x)).array().exp().matrix());
      wx /= wx.maxCoeff();
      wy /= wy.maxCoeff();
    }
    CHECK(std::abs(ay.dot(A * ax) - value) <= 2e-2);
  }
}

TEST_CASE("constrained quadratic: multipliers and the soft limit") {
  const Vec target = Vec::Ones(2);
  SUBCASE("inactive constraint has a zero multiplier") {
    std::vector<ComponentPtr> cons{std::make_shared<AffineComponent>(Vec::Ones(2), -5.0)};
    ConstrainedOptions opt;
    opt.dual_bound = Vec::Constant(1, 10.0);
    auto p = make_constrained(2, ProxFunction::quadratic(1.0, target), cons, opt);
    Comparator c = saddle_oracle(p);
    CHECK(std::abs(c.v[0]) <= 1e-6);
    CHECK((c.u - target).norm() <= 1e-4);
  }
  SUBCASE("active constraint matches KKT") {
    // min ||x - 1||^2 / 2 s.t. x1 + x2 <= 0: x = 1 - lambda (1, 1), lambda = 1.
    std::vector<ComponentPtr> cons{std::make_shared<AffineComponent>(Vec::Ones(2), 0.0)};
    ConstrainedOptions opt;
    opt.dual_bound = Vec::Constant(1, 10.0);
    auto p = make_constrained(2, ProxFunction::quadratic(1.0, target), cons, opt);
    Comparator c = saddle_oracle(p);
    CHECK(std::abs(c.v[0] - 1.0) <= 1e-4);
    CHECK(c.u.norm() <= 1e-4);
  }
  SUBCASE("soft solutions approach the hard one as nu shrinks") {
    std::vector<ComponentPtr> cons{std::make_shared<AffineComponent>(Vec::Ones(2), 0.0)};
    double prev = std::numeric_limits<double>::infinity();
    for (double nu : {1.0, 0.1, 0.01}) {
      ConstrainedOptions opt;
      opt.nu = nu;
      auto p = make_constrained(2, ProxFunction::quadratic(1.0, target), cons, opt);
      Comparator c = saddle_oracle(p);
      // y = (x1 + x2)/nu and x = 1 - y (1, 1) give y = 2 / (nu + 2).
      const double y = 2 / (nu + 2);
      CHECK(c.v[0] == doctest::Approx(y).epsilon(1e-5));
      CHECK((c.u - Vec::Constant(2, 1 - y)).norm() <= 1e-5);
      const double dist = c.u.norm() + std::abs(c.v[0] - 1.0);
      CHECK(dist < prev);
      prev = dist;
    }
    // The gap to the hard solution is (1 + sqrt 2) nu / (nu + 2) = O(nu).
    CHECK(prev <= 2 * 0.01);
  }
}

TEST_CASE("eigenvalue game") {
  SUBCASE("|x| is minimized at zero") {
    Eigen::MatrixXd A1(2, 2);
    A1 << 1, 0, 0, -1;
    auto p = make_eigen_game({A1}, 2);
    for (double x : {-0.8, -0.1, 0.5, 1.0}) {
      BestResponse br = best_response(*p, Vec::Constant(1, x), Vec::Constant(4, 0.0) + Vec::Unit(4, 0));
      CHECK(br.sup_value == doctest::Approx(std::abs(x)).epsilon(1e-12));
    }
    Comparator c = saddle_oracle(p);
    CHECK(std::abs(c.u[0]) <= 1e-6);
    CHECK(std::abs(evaluate_lagrangian(*p, c.u, c.v)) <= 1e-6);
  }
  SUBCASE("a commuting diagonal family reduces to a game over eigenvalues") {
    Eigen::MatrixXd A1 = Eigen::Vector3d(1.0, -0.5, 0.2).asDiagonal();
    Eigen::MatrixXd A2 = Eigen::Vector3d(-0.3, 0.8, 0.4).asDiagonal();
    Eigen::MatrixXd A0 = Eigen::Vector3d(0.1, 0.0, 0.3).asDiagonal();
    auto p = make_eigen_game({A1, A2}, 3, A0);
    // min over the box of max_k (a0_k + x1 a1_k + x2 a2_k), by grid refinement.
    auto F = [&](double s, double t) {
      return (A0.diagonal() + s * A1.diagonal() + t * A2.diagonal()).maxCoeff();
    };
    double cs = 0, ct = 0, w = 1, best = F(0, 0);
    while (w > 1e-11) {
      double bs = cs, bt = ct;
      for (int i = 0; i <= 60; ++i)
        for (int j = 0; j <= 60; ++j) {
          const double s = std::clamp(cs - w + w * i / 30.0, -1.0, 1.0);
          const double t = std::clamp(ct - w + w * j / 30.0, -1.0, 1.0);
          if (F(s, t) < best) {
            best = F(s, t);
            bs = s;
            bt = t;
          }
        }
      cs = bs;
      ct = bt;
      w /= 3;
    }
    Comparator c = saddle_oracle(p);
    CHECK(evaluate_lagrangian(*p, c.u, c.v) == doctest::Approx(best).epsilon(1e-6));
  }
  SUBCASE("sup side is the top eigenvalue for random symmetric data") {
    std::mt19937_64 g(6);
    std::normal_distribution<double> Z(0.0, 1.0);
    auto sym = [&]() {
      Eigen::MatrixXd M(2, 2);
      M << Z(g), Z(g), 0, Z(g);
      M(1, 0) = M(0, 1);
      return M;
    };
    std::vector<Eigen::MatrixXd> A{sym(), sym(), sym()};
    Eigen::MatrixXd A0 = sym();
    auto p = make_eigen_game(A, 2, A0);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      Vec x(3);
      x << U(g), U(g), U(g);
      Eigen::MatrixXd M = A0 + x[0] * A[0] + x[1] * A[1] + x[2] * A[2];
      const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().maxCoeff();
      Vec y(4);
      y << 0.5, 0, 0, 0.5;
      CHECK(best_response(*p, x, y).sup_value == doctest::Approx(top).epsilon(1e-12));
    }
  }
  SUBCASE("size limits") {
    CHECK_THROWS_AS(make_eigen_game({Eigen::MatrixXd::Identity(5, 5)}, 5), DomainError);
    Eigen::MatrixXd N(2, 2);
    N << 0, 1, 0, 0;
    CHECK_THROWS_AS(make_eigen_game({N}, 2), DomainError);
  }
}

TEST_CASE("every zoo problem passes the Assumption-1 spot checks") {
  std::mt19937_64 g(12);
  Dataset data = synthetic_regression(7, 3, 5);
  for (LossKind loss : {LossKind::Squared, LossKind::Logistic, LossKind::Huber})
    for (DualPenalty pen : {DualPenalty::KL, DualPenalty::Chi2, DualPenalty::BallL2}) {
      CAPTURE(to_string(loss));
      CAPTURE(to_string(pen));
      DroOptions o;
      o.loss = loss;
      o.penalty = pen;
      o.radius = 1.5;
      o.blocks = pen == DualPenalty::BallL2 ? 3 : 1;
      spot_check(*make_dro(data.features, data.targets, o), g);
    }
  std::normal_distribution<double> Z(0.0, 1.0);
  RowMat A(6, 4);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 4; ++j) A(i, j) = Z(g);
  spot_check(*make_matrix_game(A, 2), g);
  std::vector<ComponentPtr> cons{std::make_shared<AffineComponent>(Vec::Ones(2), 0.0),
                                 std::make_shared<SquaredAffineComponent>(Vec::Unit(2, 0), 0.5)};
  ConstrainedOptions opt;
  opt.domain_x = Domain::box(2, -1.0, 1.0);
  opt.dual_bound = Vec::Constant(2, 3.0);
  spot_check(*make_constrained(2, ProxFunction::quadratic(1.0), cons, opt), g);
  Eigen::MatrixXd A1(2, 2);
  A1 << 1, 0.5, 0.5, -1;
  spot_check(*make_eigen_game({A1, Eigen::MatrixXd::Identity(2, 2)}, 2), g);
}

TEST_CASE("dataset readers") {
  SUBCASE("three-line CSV") {
    std::istringstream is("1,2,3\n4,5,6\n7,8,9\n");
    Dataset d = read_dataset(is, DataFormat::Csv);
    CHECK(d.features.rows() == 3);
    CHECK(d.features.cols() == 2);
    CHECK(d.features(2, 1) == 8);
    CHECK(d.targets[1] == 6);
  }
  SUBCASE("CSV header is skipped") {
    std::istringstream is("a,b,y\n1,2,3\n");
    Dataset d = read_dataset(is, DataFormat::Csv);
    CHECK(d.features.rows() == 1);
    CHECK(d.targets[0] == 3);
  }
  SUBCASE("sparse rows are zero-filled") {
    std::istringstream is("1 1:0.5 4:2\n-1 2:3 # comment\n\n0.5\n");
    Dataset d = read_dataset(is, DataFormat::SvmLight);
    CHECK(d.features.rows() == 3);
    CHECK(d.features.cols() == 4);
    CHECK(d.features(0, 0) == 0.5);
    CHECK(d.features(0, 1) == 0);
    CHECK(d.features(0, 3) == 2);
    CHECK(d.features(1, 1) == 3);
    CHECK(d.features.row(2).isZero(0));
    CHECK(d.targets[2] == 0.5);
  }
  SUBCASE("round trips are exact") {
    Dataset d = synthetic_regression(9, 4, 2);
    d.features(3, 2) = 0;  // exercise sparse omission
    for (DataFormat f : {DataFormat::Csv, DataFormat::SvmLight}) {
      std::stringstream ss;
      write_dataset(ss, d, f);
      Dataset back = read_dataset(ss, f);
      CHECK(back.features == d.features);
      CHECK(back.targets == d.targets);
    }
  }
  SUBCASE("errors carry the line number") {
    auto message = [](const std::string& text, DataFormat f) {
      std::istringstream is(text);
      try {
        read_dataset(is, f);
      } catch (const ParseError& e) {
        return std::string(e.what());
      }
      return std::string("no error");
    };
    CHECK(message("1,2\n3,x\n", DataFormat::Csv).find("line 2") != std::string::npos);
    CHECK(message("1,2,3\n\n4,5\n", DataFormat::Csv).find("line 3") != std::string::npos);
    CHECK(message("1 1:2\n1 3:1 2:1\n", DataFormat::SvmLight).find("line 2") != std::string::npos);
    CHECK(message("1 0:2\n", DataFormat::SvmLight).find("line 1") != std::string::npos);
    CHECK(message("q 1:2\n", DataFormat::SvmLight).find("line 1") != std::string::npos);
    CHECK_THROWS_AS(load_dataset("/nonexistent/file.csv", DataFormat::Csv), ParseError);
  }
}

TEST_CASE("matrix files") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> Z(0.0, 1.0);
  RowMat A = RowMat::Zero(4, 3);
  A(0, 1) = Z(g);
  A(2, 0) = Z(g);
  A(3, 1) = Z(g);
  for (MatrixFormat f : {MatrixFormat::Dense, MatrixFormat::Triplets}) {
    std::stringstream ss;
    write_matrix(ss, A, f);
    CHECK(read_matrix(ss, f) == A);
  }
  std::istringstream trip("1 2 0.5\n3 1 -1\n1 2 0.25\n");
  RowMat B = read_matrix(trip, MatrixFormat::Triplets);
  CHECK(B.rows() == 3);
  CHECK(B.cols() == 2);
  CHECK(B(0, 1) == 0.75);
  std::istringstream bad("1 1 2\n0 1 1\n");
  CHECK_THROWS_WITH_AS(read_matrix(bad, MatrixFormat::Triplets), doctest::Contains("line 2"), ParseError);
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_WITH_AS(read_matrix(ragged, MatrixFormat::Dense), doctest::Contains("line 2"), ParseError);
}
