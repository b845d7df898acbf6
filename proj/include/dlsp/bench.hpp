#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dlsp/gap.hpp"
#include "dlsp/zoo.hpp"

namespace dlsp {

enum class SolverKind { Full, Stochastic, Separable };
enum class Strategy { Historic, Replacement };

std::string to_string(SolverKind k);
std::string to_string(Strategy s);

struct ProblemConfig {
  // matrix-game | dro | scalar-toy | bilinear-toy | constrained | eigen-game
  std::string kind = "matrix-game";
  std::string matrix_path, matrix_format = "dense";
  std::string data_path, data_format = "csv";
  Index rows = 10, cols = 10;  // matrix sizes; for dro, samples x features
  double density = 1.0;
  std::uint64_t seed = 1;
  std::string loss = "squared", penalty = "chi2";
  double nu = 1.0, mu = 1.0, radius = 0.0, huber_delta = 1.0;
  Index blocks = 1;
  // Rows of this block get their features scaled, which scales its constants.
  std::optional<Index> heavy_block;
  double heavy_scale = 1.0;
  Index order = 2;                 // eigen-game matrix size
  std::optional<double> dual_bound;  // constrained: common bound on the multipliers
};

struct SolverConfig {
  SolverKind method = SolverKind::Full;
  Strategy strategy = Strategy::Historic;
  Sampling sampling = Sampling::Importance;
};

struct ScheduleConfig {
  std::optional<double> mu0, nu0, alpha, mu, nu;
  bool switch_weights = true;
};

struct RunConfig {
  std::uint64_t seed = 1;
  Index seeds = 1;
  Index horizon = 1000;
  std::string out = "bench_out";
  bool verbose = false;
  bool saddle_comparator = true;
  bool certify = true;
  bool wall_clock = true;
};

struct BenchConfig {
  ProblemConfig problem;
  SolverConfig solver;
  ScheduleConfig schedule;
  RunConfig run;
};

// INI text with sections [problem], [solver], [schedule], [run]. Unknown
// sections or keys and malformed values raise ConfigError.
BenchConfig parse_config(std::istream& is);
BenchConfig load_config(const std::string& path);

ProblemPtr make_problem(const ProblemConfig& c);
ScheduleKind schedule_kind(const SolverConfig& s);
// Validates solver/problem compatibility and builds the plan and schedule.
Prepared prepare_bench(const SaddleProblem& p, const BenchConfig& c);

// Certificate of one trajectory against a fixed comparator:
//   sum_k a_k Gap(x_k, y'_k) + cP_t T^P_t + cD T^D_t <= rhs
// with y'_k = ybar_k for the historic separable form and y_k otherwise.
struct CertificateForm {
  ScheduleKind kind = ScheduleKind::FullVector;
  double td_coef = 1.0, rhs = 0.0;
  bool gap_at_ybar = false;
  double tp_coef(const Schedule& s, Index t) const;
};

CertificateForm certificate_form(const SaddleProblem& p, const Schedule& s, const Comparator& c, const Vec& x0,
                                 const Vec& y0);

// Accumulates the left-hand side along a run.
class CertificateTracker {
 public:
  CertificateTracker(const SaddleProblem& p, const Schedule& s, Comparator c, const Vec& x0, const Vec& y0);
  // Adds iterate t; y_gap is the dual point entering the gap term.
  void add(Index t, const Vec& x, const Vec& y, const Vec& y_gap);
  double lhs() const { return lhs_; }
  double rhs() const { return form_.rhs; }
  const CertificateForm& form() const { return form_; }

 private:
  const SaddleProblem* p_;
  const Schedule* s_;
  Comparator c_;
  CertificateForm form_;
  Geometry gx_, gy_;
  Real sum_ = 0;  // geometric schedules overflow double
  double lhs_ = 0;
};

struct TraceRow {
  Index iter = 0;
  long long oracle_calls = 0;
  long long wall_ns = 0;
  double gap_fixed = 0, gap_best_response = 0;  // NaN when not evaluated
  long double A_k = 0, a_k = 0;
  std::optional<std::array<Index, 4>> draws;  // P, Q, R, S; -1 when unused
};

void write_trace_header(std::ostream& os, bool verbose);
void write_trace_row(std::ostream& os, const TraceRow& r, bool verbose);
std::vector<TraceRow> read_trace(std::istream& is);

// Iterations at which gaps are evaluated: 1, every ceil(T/200), and T.
std::vector<Index> checkpoints(Index horizon);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;  // checkpoint rows
  OracleCounter calls;
  // Deterministic certificate: worst relative excess over all iterations.
  std::optional<double> certificate_excess;
  std::vector<double> certificate_lhs;  // at each checkpoint
  double certificate_rhs = 0;
};

struct RunResult {
  BenchConfig config;
  std::vector<SeedResult> seeds;  // sorted by seed
  CertReport schedule_report;
  bool schedule_certified = false;
  bool trajectory_certified = true;
  std::string trajectory_note;
  bool pass() const { return schedule_certified && trajectory_certified; }
};

// Runs every seed, writes trace_seed<S>.csv and summary.json under config.run.out.
// Seeds fan out over DLSP_THREADS workers (default: hardware concurrency).
RunResult run_bench(const BenchConfig& config);

int threads_from_env();

struct CompareEntry {
  std::string dir, label;
  bool present = false;
  std::optional<double> median_calls;  // oracle calls to reach eps, median over seeds
  double final_gap = 0;
};

// Reads run directories and tabulates oracle calls to reach eps on the
// best-response gap (or the fixed-comparator gap when use_fixed).
std::vector<CompareEntry> compare_runs(const std::vector<std::string>& dirs, double eps, bool use_fixed = false);
void print_compare(std::ostream& os, const std::vector<CompareEntry>& rows, double eps);

}  // namespace dlsp
