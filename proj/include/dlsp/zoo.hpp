#pragma once

#include <optional>
#include <string>

#include "dlsp/problem.hpp"

namespace dlsp {

enum class LossKind { Squared, Logistic, Huber };
enum class DualPenalty { KL, Chi2, BallL2 };

LossKind loss_from_string(const std::string& s);
DualPenalty penalty_from_string(const std::string& s);
std::string to_string(LossKind k);
std::string to_string(DualPenalty k);

struct DroOptions {
  LossKind loss = LossKind::Squared;
  // kl:      Y = simplex, psi = nu * KL(y || uniform), entropy geometry
  // chi2:    Y = simplex, psi = (nu/2) ||y - uniform||^2
  // ball-l2: Y = orthant, psi = (nu/2) ||y - uniform||^2; factors over any partition
  DualPenalty penalty = DualPenalty::Chi2;
  double nu = 1.0;
  double mu = 1.0;
  double huber_delta = 1.0;
  // Primal box [-radius, radius]^d; 0 means the full space. The ball-l2
  // penalty with a nonlinear loss needs a finite radius to bound the duals.
  double radius = 0.0;
  Index blocks = 1;
  std::vector<IndexList> partition;  // overrides blocks when nonempty
};

// min_x max_y sum_j y_j loss_j(x) - psi(y) + (mu/2)||x||^2 over samples (z_j, b_j).
ProblemPtr make_dro(const RowMat& features, const Vec& targets, const DroOptions& opt = {});

// min_{x in simplex} max_{y in simplex} y'Ax with entropy geometry on both sides.
ProblemPtr make_matrix_game(const RowMat& A, Index blocks = 1);

struct ConstrainedOptions {
  Domain domain_x = Domain::full();
  double nu = 0.0;                 // > 0 gives the soft version psi = (nu/2)||y||^2
  std::optional<Vec> dual_bound;   // required for the hard version with nonlinear constraints
  Index blocks = 1;
};

// Lagrangian of min phi(x) s.t. f_j(x) <= 0: Y = nonnegative orthant.
ProblemPtr make_constrained(Index d, const ProxFunction& phi, std::vector<ComponentPtr> constraints,
                            const ConstrainedOptions& opt = {});

// Experimental. min_{x in [-1,1]^d} lambda_max(A_0 + sum_i x_i A_i) as a
// saddle over the spectraplex of m x m matrices (m <= 4), Euclidean geometry.
ProblemPtr make_eigen_game(const std::vector<Eigen::MatrixXd>& A, Index m,
                           const std::optional<Eigen::MatrixXd>& A0 = std::nullopt, Index blocks = 1);

// L(x, y) = x y + (mu/2) x^2 - (nu/2) y^2 on the real line; saddle at (0, 0).
ProblemPtr make_scalar_toy(double mu = 1.0, double nu = 1.0);

// Bilinear toy with n components split into `blocks` blocks:
// L(x, y) = y' B x - (nu/2)||y||^2 + (mu/2)||x||^2 on the full spaces.
ProblemPtr make_bilinear_toy(const RowMat& B, double mu, double nu, Index blocks);

struct Dataset {
  RowMat features;
  Vec targets;
};

enum class DataFormat { Csv, SvmLight };
DataFormat format_from_string(const std::string& s);

// CSV: one sample per line, target in the last column. SvmLight:
// "target idx:val ..." with 1-based feature indices, missing entries zero.
Dataset load_dataset(const std::string& path, DataFormat format);
Dataset read_dataset(std::istream& is, DataFormat format);
void write_dataset(std::ostream& os, const Dataset& data, DataFormat format);

// Payoff matrices: dense CSV rows, or "row col value" triplets with 1-based
// indices and the size taken from the largest index. Repeated triplets add up.
enum class MatrixFormat { Dense, Triplets };
MatrixFormat matrix_format_from_string(const std::string& s);
RowMat read_matrix(std::istream& is, MatrixFormat format);
RowMat load_matrix(const std::string& path, MatrixFormat format);
void write_matrix(std::ostream& os, const RowMat& A, MatrixFormat format);

// Gaussian features with targets from a planted linear model plus noise.
Dataset synthetic_regression(Index n, Index d, std::uint64_t seed, double noise = 0.1);

}  // namespace dlsp
