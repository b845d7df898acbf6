#include "dlsp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "dlsp/solver_full.hpp"
#include "dlsp/solver_separable.hpp"
#include "dlsp/solver_stochastic.hpp"

namespace dlsp {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using nlohmann::json;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Full: return "full";
    case SolverKind::Stochastic: return "stochastic";
    case SolverKind::Separable: return "separable";
  }
  return "?";
}

std::string to_string(Strategy s) { return s == Strategy::Historic ? "historic" : "replacement"; }

// ---------------------------------------------------------------- config

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"problem",
       {"kind", "matrix", "matrix_format", "data", "data_format", "rows", "cols", "samples", "features", "density",
        "seed", "loss", "penalty", "nu", "mu", "radius", "huber_delta", "blocks", "heavy_block", "heavy_scale",
        "order", "dual_bound"}},
      {"solver", {"method", "strategy", "sampling"}},
      {"schedule", {"mu0", "nu0", "alpha", "mu", "nu", "switch_weights"}},
      {"run", {"seed", "seeds", "horizon", "out", "verbose", "comparator", "certify", "wall_clock"}},
  };
  return s;
}

template <class T>
std::optional<T> read_opt(const pt::ptree& sec, const std::string& section, const std::string& key) {
  auto node = sec.get_child_optional(key);
  if (!node) return std::nullopt;
  auto v = node->get_value_optional<T>();
  if (!v) throw ConfigError("[" + section + "] " + key + ": cannot parse '" + node->data() + "'");
  return *v;
}

template <class T>
void read_into(const pt::ptree& sec, const std::string& section, const std::string& key, T& out) {
  if (auto v = read_opt<T>(sec, section, key)) out = *v;
}

Index positive_index(const pt::ptree& sec, const std::string& section, const std::string& key, Index fallback) {
  auto v = read_opt<long long>(sec, section, key);
  if (!v) return fallback;
  if (*v <= 0) throw ConfigError("[" + section + "] " + key + " must be positive");
  return static_cast<Index>(*v);
}

}  // namespace

BenchConfig parse_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  for (const auto& [name, sec] : tree) {
    auto it = schema().find(name);
    if (it == schema().end()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, _] : sec)
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
  }
  if (!tree.get_child_optional("problem")) throw ConfigError("missing section [problem]");

  BenchConfig c;
  const pt::ptree empty;
  const auto& P = tree.get_child("problem");
  const auto& S = tree.get_child_optional("solver") ? tree.get_child("solver") : empty;
  const auto& H = tree.get_child_optional("schedule") ? tree.get_child("schedule") : empty;
  const auto& R = tree.get_child_optional("run") ? tree.get_child("run") : empty;

  auto& pc = c.problem;
  read_into(P, "problem", "kind", pc.kind);
  static const std::set<std::string> kinds = {"matrix-game", "dro",         "scalar-toy",
                                              "bilinear-toy", "constrained", "eigen-game"};
  if (!kinds.count(pc.kind)) throw ConfigError("[problem] kind: unknown '" + pc.kind + "'");
  read_into(P, "problem", "matrix", pc.matrix_path);
  read_into(P, "problem", "matrix_format", pc.matrix_format);
  read_into(P, "problem", "data", pc.data_path);
  read_into(P, "problem", "data_format", pc.data_format);
  pc.rows = positive_index(P, "problem", "rows", pc.rows);
  pc.cols = positive_index(P, "problem", "cols", pc.cols);
  pc.rows = positive_index(P, "problem", "samples", pc.rows);
  pc.cols = positive_index(P, "problem", "features", pc.cols);
  read_into(P, "problem", "density", pc.density);
  if (!(pc.density > 0 && pc.density <= 1)) throw ConfigError("[problem] density must lie in (0, 1]");
  read_into(P, "problem", "seed", pc.seed);
  read_into(P, "problem", "loss", pc.loss);
  read_into(P, "problem", "penalty", pc.penalty);
  read_into(P, "problem", "nu", pc.nu);
  read_into(P, "problem", "mu", pc.mu);
  read_into(P, "problem", "radius", pc.radius);
  read_into(P, "problem", "huber_delta", pc.huber_delta);
  if (pc.nu < 0 || pc.mu < 0 || pc.radius < 0) throw ConfigError("[problem] nu, mu and radius must be nonnegative");
  pc.blocks = positive_index(P, "problem", "blocks", pc.blocks);
  if (auto hb = read_opt<long long>(P, "problem", "heavy_block")) {
    if (*hb < 0 || *hb >= pc.blocks) throw ConfigError("[problem] heavy_block out of range");
    pc.heavy_block = static_cast<Index>(*hb);
  }
  read_into(P, "problem", "heavy_scale", pc.heavy_scale);
  pc.order = positive_index(P, "problem", "order", pc.order);
  pc.dual_bound = read_opt<double>(P, "problem", "dual_bound");
  try {
    (void)loss_from_string(pc.loss);
    (void)penalty_from_string(pc.penalty);
    (void)matrix_format_from_string(pc.matrix_format);
    (void)format_from_string(pc.data_format);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("[problem] ") + e.what());
  }

  if (auto m = read_opt<std::string>(S, "solver", "method")) {
    if (*m == "full") c.solver.method = SolverKind::Full;
    else if (*m == "stochastic") c.solver.method = SolverKind::Stochastic;
    else if (*m == "separable") c.solver.method = SolverKind::Separable;
    else throw ConfigError("[solver] method: unknown '" + *m + "'");
  }
  if (auto s = read_opt<std::string>(S, "solver", "strategy")) {
    if (*s == "historic") c.solver.strategy = Strategy::Historic;
    else if (*s == "replacement") c.solver.strategy = Strategy::Replacement;
    else throw ConfigError("[solver] strategy: unknown '" + *s + "'");
  }
  if (auto s = read_opt<std::string>(S, "solver", "sampling")) {
    if (*s == "uniform") c.solver.sampling = Sampling::Uniform;
    else if (*s == "importance") c.solver.sampling = Sampling::Importance;
    else throw ConfigError("[solver] sampling: unknown '" + *s + "'");
  }

  auto& sc = c.schedule;
  sc.mu0 = read_opt<double>(H, "schedule", "mu0");
  sc.nu0 = read_opt<double>(H, "schedule", "nu0");
  sc.alpha = read_opt<double>(H, "schedule", "alpha");
  sc.mu = read_opt<double>(H, "schedule", "mu");
  sc.nu = read_opt<double>(H, "schedule", "nu");
  read_into(H, "schedule", "switch_weights", sc.switch_weights);
  if ((sc.mu0 && *sc.mu0 <= 0) || (sc.nu0 && *sc.nu0 <= 0)) throw ConfigError("[schedule] mu0 and nu0 must be positive");
  if ((sc.mu && *sc.mu < 0) || (sc.nu && *sc.nu < 0)) throw ConfigError("[schedule] mu and nu must be nonnegative");
  if (sc.alpha && *sc.alpha <= 0) throw ConfigError("[schedule] alpha must be positive");

  auto& rc = c.run;
  read_into(R, "run", "seed", rc.seed);
  rc.seeds = positive_index(R, "run", "seeds", rc.seeds);
  rc.horizon = positive_index(R, "run", "horizon", rc.horizon);
  read_into(R, "run", "out", rc.out);
  read_into(R, "run", "verbose", rc.verbose);
  if (auto cmp = read_opt<std::string>(R, "run", "comparator")) {
    if (*cmp == "saddle") rc.saddle_comparator = true;
    else if (*cmp == "none") rc.saddle_comparator = false;
    else throw ConfigError("[run] comparator: unknown '" + *cmp + "'");
  }
  read_into(R, "run", "certify", rc.certify);
  read_into(R, "run", "wall_clock", rc.wall_clock);
  return c;
}

BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

// ---------------------------------------------------------------- problems

namespace {

RowMat random_uniform_matrix(Index rows, Index cols, double density, std::mt19937_64& g) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), B(0.0, 1.0);
  RowMat A = RowMat::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (density >= 1.0 || B(g) < density) A(i, j) = U(g);
  return A;
}

}  // namespace

ProblemPtr make_problem(const ProblemConfig& c) {
  std::mt19937_64 g(c.seed);
  if (c.kind == "scalar-toy") return make_scalar_toy(c.mu, c.nu);
  if (c.kind == "matrix-game") {
    RowMat A = c.matrix_path.empty() ? random_uniform_matrix(c.rows, c.cols, c.density, g)
                                     : load_matrix(c.matrix_path, matrix_format_from_string(c.matrix_format));
    return make_matrix_game(A, c.blocks);
  }
  if (c.kind == "bilinear-toy") {
    std::normal_distribution<double> Z;
    RowMat B(c.rows, c.cols);
    for (Index i = 0; i < B.rows(); ++i)
      for (Index j = 0; j < B.cols(); ++j) B(i, j) = Z(g);
    return make_bilinear_toy(B, c.mu, c.nu, c.blocks);
  }
  if (c.kind == "dro") {
    Dataset data = c.data_path.empty() ? synthetic_regression(c.rows, c.cols, c.seed)
                                       : load_dataset(c.data_path, format_from_string(c.data_format));
    DroOptions o;
    o.loss = loss_from_string(c.loss);
    o.penalty = penalty_from_string(c.penalty);
    o.nu = c.nu;
    o.mu = c.mu;
    o.radius = c.radius;
    o.huber_delta = c.huber_delta;
    o.blocks = c.blocks;
    // Synthetic targets are real valued; classification needs labels.
    if (c.data_path.empty() && o.loss == LossKind::Logistic)
      data.targets = data.targets.unaryExpr([](double t) { return t >= 0 ? 1.0 : -1.0; });
    if (c.heavy_block) {
      const auto parts = BlockPartition::contiguous(data.features.rows(), c.blocks);
      for (Index i : parts[static_cast<size_t>(*c.heavy_block)]) data.features.row(i) *= c.heavy_scale;
    }
    return make_dro(data.features, data.targets, o);
  }
  if (c.kind == "constrained") {
    // min (mu/2)||x - 1||^2 s.t. <a_j, x> <= 0 for random a_j.
    RowMat A = random_uniform_matrix(c.rows, c.cols, c.density, g);
    std::vector<ComponentPtr> cons;
    for (Index j = 0; j < A.rows(); ++j) cons.push_back(std::make_shared<AffineComponent>(Vec(A.row(j).transpose()), 0.0));
    ConstrainedOptions o;
    o.nu = c.nu;
    o.blocks = c.blocks;
    if (c.dual_bound) o.dual_bound = Vec::Constant(c.rows, *c.dual_bound);
    return make_constrained(c.cols, ProxFunction::quadratic(c.mu, Vec::Ones(c.cols)), std::move(cons), o);
  }
  // eigen-game: random symmetric m x m matrices, one per coordinate.
  std::normal_distribution<double> Z;
  std::vector<Eigen::MatrixXd> mats;
  for (Index i = 0; i < c.cols; ++i) {
    Eigen::MatrixXd M(c.order, c.order);
    for (Index r = 0; r < c.order; ++r)
      for (Index s = 0; s < c.order; ++s) M(r, s) = Z(g);
    mats.push_back(0.5 * (M + M.transpose()));
  }
  return make_eigen_game(mats, c.order, std::nullopt, c.blocks);
}

ScheduleKind schedule_kind(const SolverConfig& s) {
  const bool hist = s.strategy == Strategy::Historic;
  switch (s.method) {
    case SolverKind::Full: return ScheduleKind::FullVector;
    case SolverKind::Stochastic: return hist ? ScheduleKind::StochasticHistoric : ScheduleKind::StochasticReplacement;
    case SolverKind::Separable: return hist ? ScheduleKind::SeparableHistoric : ScheduleKind::SeparableReplacement;
  }
  return ScheduleKind::FullVector;
}

Prepared prepare_bench(const SaddleProblem& p, const BenchConfig& c) {
  if (c.solver.method == SolverKind::Separable && !p.dual_separable)
    throw SeparabilityError("separable solver needs a dual domain and penalty that factor over the blocks");
  MethodSetup m;
  m.kind = schedule_kind(c.solver);
  m.sampling = c.solver.sampling;
  Regime r = default_regime(p, m.kind);
  if (c.schedule.mu) r.mu = *c.schedule.mu;
  if (c.schedule.nu) r.nu = *c.schedule.nu;
  if (c.schedule.mu0) r.mu0 = *c.schedule.mu0;
  if (c.schedule.nu0) r.nu0 = *c.schedule.nu0;
  if (r.mu > p.mu || r.nu > p.nu)
    throw ConfigError("[schedule] mu and nu cannot exceed the problem's moduli");
  m.regime = r;
  m.schedule.horizon = c.run.horizon;
  m.schedule.alpha = c.schedule.alpha;
  m.schedule.switch_weights = c.schedule.switch_weights;
  return prepare_method(p, m);
}

// ---------------------------------------------------------------- certificates

double CertificateForm::tp_coef(const Schedule& s, Index t) const {
  switch (kind) {
    case ScheduleKind::FullVector:
    case ScheduleKind::StochasticReplacement:
    case ScheduleKind::SeparableReplacement: return 0.5;
    case ScheduleKind::StochasticHistoric: return 0.25;
    case ScheduleKind::SeparableHistoric: return (1.0 - s.wP(t)) / 4.0;
  }
  return 0.5;
}

CertificateForm certificate_form(const SaddleProblem& p, const Schedule& s, const Comparator& c, const Vec& x0,
                                 const Vec& y0) {
  const Geometry gx{p.geom_x}, gy{p.geom_y};
  const Regime& r = s.regime();
  const double a1 = static_cast<double>(s.a(1));
  const double T0P = r.mu0 * gx.divergence(c.u, x0), T0D = r.nu0 * gy.divergence(c.v, y0);
  const double N = static_cast<double>(p.N);
  CertificateForm f;
  f.kind = s.kind();
  switch (f.kind) {
    case ScheduleKind::FullVector: f.td_coef = 1.0; f.rhs = T0P + T0D; break;
    case ScheduleKind::StochasticReplacement: f.td_coef = 0.5; f.rhs = T0P + T0D; break;
    case ScheduleKind::StochasticHistoric:
      f.td_coef = 0.25;
      f.rhs = (a1 * r.mu + r.mu0) * gx.divergence(c.u, x0) + (a1 * r.nu + r.nu0) * gy.divergence(c.v, y0);
      break;
    case ScheduleKind::SeparableReplacement:
      f.td_coef = N / 2;
      f.rhs = 0.5 * T0P + N / 2 * T0D;
      break;
    case ScheduleKind::SeparableHistoric:
      f.td_coef = 0.25;
      f.gap_at_ybar = true;
      f.rhs = (a1 * r.mu + r.mu0) * gx.divergence(c.u, x0) + 0.5 * T0D;
      break;
  }
  return f;
}

CertificateTracker::CertificateTracker(const SaddleProblem& p, const Schedule& s, Comparator c, const Vec& x0,
                                       const Vec& y0)
    : p_(&p), s_(&s), c_(std::move(c)), form_(certificate_form(p, s, c_, x0, y0)), gx_{p.geom_x}, gy_{p.geom_y} {}

void CertificateTracker::add(Index t, const Vec& x, const Vec& y, const Vec& y_gap) {
  const Regime& r = s_->regime();
  const Real a = s_->a(t), A = s_->A(t);
  sum_ += a * gap(*p_, x, y_gap, c_);
  lhs_ = static_cast<double>(sum_ + form_.tp_coef(*s_, t) * (A * r.mu + r.mu0) * gx_.divergence(c_.u, x) +
                             form_.td_coef * (A * r.nu + r.nu0) * gy_.divergence(c_.v, y));
}

// ---------------------------------------------------------------- traces

namespace {

const char* kColumns = "iter,oracle_calls,wall_ns,gap_fixed,gap_best_response,A_k,a_k";

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_real(long double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_trace_header(std::ostream& os, bool verbose) {
  os << kColumns << (verbose ? ",P,Q,R,S" : "") << '\n';
}

void write_trace_row(std::ostream& os, const TraceRow& r, bool verbose) {
  os << r.iter << ',' << r.oracle_calls << ',' << r.wall_ns << ',' << fmt_double(r.gap_fixed) << ','
     << fmt_double(r.gap_best_response) << ',' << fmt_real(r.A_k) << ',' << fmt_real(r.a_k);
  if (verbose) {
    const auto d = r.draws.value_or(std::array<Index, 4>{-1, -1, -1, -1});
    for (Index v : d) {
      os << ',';
      if (v >= 0) os << v;
    }
  }
  os << '\n';
}

std::vector<TraceRow> read_trace(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("trace: empty input");
  const auto head = split_csv(line);
  const bool verbose = head.size() == 11;
  if (line.rfind(kColumns, 0) != 0 || (head.size() != 7 && !verbose)) throw ParseError("trace: bad header");
  std::vector<TraceRow> rows;
  Index lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != head.size()) throw ParseError("trace: line " + std::to_string(lineno) + ": wrong field count");
    try {
      TraceRow r;
      r.iter = std::stoll(f[0]);
      r.oracle_calls = std::stoll(f[1]);
      r.wall_ns = std::stoll(f[2]);
      r.gap_fixed = f[3].empty() ? kNaN : std::stod(f[3]);
      r.gap_best_response = f[4].empty() ? kNaN : std::stod(f[4]);
      r.A_k = std::stold(f[5]);
      r.a_k = std::stold(f[6]);
      if (verbose) {
        std::array<Index, 4> d{};
        for (int i = 0; i < 4; ++i) d[static_cast<size_t>(i)] = f[7 + i].empty() ? -1 : std::stoll(f[7 + i]);
        r.draws = d;
      }
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError("trace: line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

std::vector<Index> checkpoints(Index horizon) {
  const Index stride = std::max<Index>(1, (horizon + 199) / 200);
  std::vector<Index> out{1};
  for (Index t = stride; t <= horizon; t += stride)
    if (t > 1) out.push_back(t);
  if (out.back() != horizon) out.push_back(horizon);
  return out;
}

// ---------------------------------------------------------------- runs

namespace {

// Uniform view over the three solvers for the runner.
class Trajectory {
 public:
  virtual ~Trajectory() = default;
  virtual void step() = 0;
  virtual const Vec& x() const = 0;
  virtual const Vec& y() const = 0;
  virtual const Vec& x0() const = 0;
  virtual const Vec& y0() const = 0;
  virtual const OracleCounter& calls() const = 0;
  virtual const Schedule& schedule() const = 0;
  // Dual point paired with x_k in the certificate's gap term.
  virtual Vec gap_dual(bool ybar) = 0;
  // Point whose gap is reported in the trace.
  virtual std::pair<Vec, Vec> reported() = 0;
  virtual std::array<Index, 4> draws() const { return {-1, -1, -1, -1}; }
};

template <class S>
class Averaged : public Trajectory {
 public:
  explicit Averaged(S s) : s_(std::move(s)) {}
  void step() override { s_.step(); }
  const Vec& x() const override { return s_.x(); }
  const Vec& y() const override { return s_.y(); }
  const Vec& x0() const override { return s_.x0(); }
  const Vec& y0() const override { return s_.y0(); }
  const OracleCounter& calls() const override { return s_.calls(); }
  const Schedule& schedule() const override { return s_.schedule(); }
  Vec gap_dual(bool) override { return s_.y(); }
  std::pair<Vec, Vec> reported() override { return {s_.x_average(), s_.y_average()}; }
  std::array<Index, 4> draws() const override {
    if constexpr (std::is_same_v<S, StochasticSolver>) {
      const auto& d = s_.last_draws();
      return {d.P, d.Q, d.R, d.S};
    } else {
      return {-1, -1, -1, -1};
    }
  }

 private:
  S s_;
};

class Separable : public Trajectory {
 public:
  explicit Separable(SeparableSolver s) : s_(std::move(s)) {}
  void step() override {
    s_.step();
    ybar_k_ = -1;
  }
  const Vec& x() const override { return s_.x(); }
  const Vec& y() const override { return s_.y(); }
  const Vec& x0() const override { return s_.x0(); }
  const Vec& y0() const override { return s_.y0(); }
  const OracleCounter& calls() const override { return s_.calls(); }
  const Schedule& schedule() const override { return s_.schedule(); }
  Vec gap_dual(bool ybar) override { return ybar ? this->ybar() : s_.y(); }
  std::pair<Vec, Vec> reported() override { return {s_.x(), ybar()}; }
  std::array<Index, 4> draws() const override {
    const auto& d = s_.last_draws();
    return {d.P, d.Q, d.R, -1};
  }

 private:
  const Vec& ybar() {
    if (ybar_k_ != s_.k()) {
      ybar_ = s_.materialize_ybar();
      ybar_k_ = s_.k();
    }
    return ybar_;
  }
  SeparableSolver s_;
  Vec ybar_;
  Index ybar_k_ = -1;
};

std::unique_ptr<Trajectory> make_trajectory(const ProblemPtr& p, const Prepared& m, SolverKind kind,
                                            std::uint64_t seed) {
  switch (kind) {
    case SolverKind::Full: return std::make_unique<Averaged<FullSolver>>(FullSolver(p, m.schedule));
    case SolverKind::Stochastic:
      return std::make_unique<Averaged<StochasticSolver>>(StochasticSolver(p, m, seed));
    case SolverKind::Separable: return std::make_unique<Separable>(SeparableSolver(p, m, seed));
  }
  return nullptr;
}

SeedResult run_seed(const BenchConfig& c, const ProblemPtr& p, const Prepared& m,
                    const std::optional<Comparator>& cmp, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const bool verbose = c.run.verbose;
  const Index T = c.run.horizon;
  auto traj = make_trajectory(p, m, c.solver.method, seed);

  std::ofstream out(fs::path(c.run.out) / ("trace_seed" + std::to_string(seed) + ".csv"), std::ios::trunc);
  if (!out) throw ConfigError("cannot write traces under '" + c.run.out + "'");
  write_trace_header(out, verbose);

  SeedResult res;
  res.seed = seed;
  std::optional<CertificateTracker> cert;
  if (cmp && c.run.certify) {
    cert.emplace(*p, traj->schedule(), *cmp, traj->x0(), traj->y0());
    res.certificate_rhs = cert->rhs();
    if (c.solver.method == SolverKind::Full) res.certificate_excess = -std::numeric_limits<double>::infinity();
  }
  const auto marks = checkpoints(T);
  size_t next = 0;
  for (Index t = 1; t <= T; ++t) {
    traj->step();
    if (cert) {
      cert->add(t, traj->x(), traj->y(), traj->gap_dual(cert->form().gap_at_ybar));
      if (res.certificate_excess)
        res.certificate_excess =
            std::max(*res.certificate_excess, (cert->lhs() - cert->rhs()) / std::max(cert->rhs(), 1e-12));
    }
    const bool mark = next < marks.size() && marks[next] == t;
    if (!mark && !verbose) continue;
    TraceRow r;
    r.iter = t;
    r.oracle_calls = traj->calls().solver_total();
    r.A_k = traj->schedule().A(t);
    r.a_k = traj->schedule().a(t);
    r.gap_fixed = r.gap_best_response = kNaN;
    if (verbose) r.draws = traj->draws();
    if (mark) {
      ++next;
      const auto [xr, yr] = traj->reported();
      if (cmp) r.gap_fixed = gap(*p, xr, yr, *cmp);
      try {
        r.gap_best_response = best_response_gap(*p, xr, yr);
      } catch (const UnboundedGap&) {
        r.gap_best_response = std::numeric_limits<double>::infinity();
      }
      if (cert) res.certificate_lhs.push_back(cert->lhs());
    }
    if (c.run.wall_clock)
      r.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
    write_trace_row(out, r, verbose);
    if (mark) {
      r.draws.reset();
      res.rows.push_back(r);
    }
  }
  res.calls = traj->calls();
  return res;
}

struct MeanSe {
  double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return m;
  double ss = 0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return m;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const BenchConfig& c) {
  const auto& p = c.problem;
  json j;
  j["problem"] = {{"kind", p.kind}, {"matrix", p.matrix_path}, {"data", p.data_path}, {"rows", p.rows},
                  {"cols", p.cols}, {"density", p.density}, {"seed", p.seed}, {"loss", p.loss},
                  {"penalty", p.penalty}, {"nu", p.nu}, {"mu", p.mu}, {"radius", p.radius},
                  {"blocks", p.blocks}, {"heavy_scale", p.heavy_scale}};
  if (p.heavy_block) j["problem"]["heavy_block"] = *p.heavy_block;
  j["solver"] = {{"method", to_string(c.solver.method)},
                 {"strategy", to_string(c.solver.strategy)},
                 {"sampling", to_string(c.solver.sampling)}};
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  j["schedule"] = {{"mu0", opt(c.schedule.mu0)}, {"nu0", opt(c.schedule.nu0)}, {"alpha", opt(c.schedule.alpha)},
                   {"mu", opt(c.schedule.mu)},   {"nu", opt(c.schedule.nu)},   {"switch_weights", c.schedule.switch_weights}};
  j["run"] = {{"seed", c.run.seed},       {"seeds", c.run.seeds},
              {"horizon", c.run.horizon}, {"verbose", c.run.verbose},
              {"comparator", c.run.saddle_comparator ? "saddle" : "none"},
              {"certify", c.run.certify}, {"wall_clock", c.run.wall_clock}};
  return j;
}

void write_summary(const RunResult& r, const ProblemPtr& p, const Prepared& m) {
  const auto& c = r.config;
  json j;
  j["config"] = config_json(c);
  j["problem"] = {{"d", p->d}, {"n", p->n}, {"N", p->N}, {"mu", p->mu}, {"nu", p->nu}};
  j["schedule"] = {{"description", m.schedule.describe()},
                   {"certified", r.schedule_certified},
                   {"report", r.schedule_report.summary()}};
  json seeds = json::array();
  for (const auto& s : r.seeds) {
    json e;
    e["seed"] = s.seed;
    e["iterations"] = s.rows.empty() ? 0 : s.rows.back().iter;
    e["final"] = {{"gap_fixed", num(s.rows.back().gap_fixed)},
                  {"gap_best_response", num(s.rows.back().gap_best_response)}};
    e["oracle_calls"] = {{"main", s.calls.main},
                         {"init", s.calls.init},
                         {"cache", s.calls.cache},
                         {"total", s.calls.solver_total()},
                         {"diagnostic", s.calls.diag}};
    if (s.certificate_excess) {
      e["certificate"] = {{"max_relative_excess", *s.certificate_excess},
                          {"pass", *s.certificate_excess <= 1e-8}};
    }
    seeds.push_back(e);
  }
  j["seeds"] = seeds;

  json cps = json::array();
  for (size_t i = 0; i < r.seeds.front().rows.size(); ++i) {
    std::vector<double> gf, gb, calls, lhs;
    for (const auto& s : r.seeds) {
      gf.push_back(s.rows[i].gap_fixed);
      gb.push_back(s.rows[i].gap_best_response);
      calls.push_back(static_cast<double>(s.rows[i].oracle_calls));
      if (i < s.certificate_lhs.size()) lhs.push_back(s.certificate_lhs[i]);
    }
    const auto f = mean_se(gf), b = mean_se(gb), k = mean_se(calls);
    json e = {{"iter", r.seeds.front().rows[i].iter},
              {"gap_fixed_mean", num(f.mean)},
              {"gap_fixed_se", num(f.se)},
              {"gap_best_response_mean", num(b.mean)},
              {"gap_best_response_se", num(b.se)},
              {"oracle_calls_mean", k.mean}};
    if (lhs.size() == r.seeds.size() && !lhs.empty()) {
      const auto l = mean_se(lhs);
      e["certificate_lhs_mean"] = l.mean;
      e["certificate_lhs_se"] = l.se;
      e["certificate_rhs"] = r.seeds.front().certificate_rhs;
    }
    cps.push_back(e);
  }
  j["checkpoints"] = cps;
  j["certificates"] = {{"schedule", r.schedule_certified},
                       {"trajectory", r.trajectory_certified},
                       {"note", r.trajectory_note}};
  j["pass"] = r.pass();
  std::ofstream out(fs::path(c.run.out) / "summary.json", std::ios::trunc);
  out << j.dump(2) << '\n';
}

}  // namespace

int threads_from_env() {
  if (const char* s = std::getenv("DLSP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ConfigError("DLSP_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RunResult run_bench(const BenchConfig& config) {
  RunResult r;
  r.config = config;
  const auto& c = config;
  ProblemPtr p = make_problem(c.problem);
  Prepared m = prepare_bench(*p, c);
  fs::create_directories(c.run.out);

  r.schedule_report = certify_schedule(m.schedule, m.schedule.kind(), c.run.horizon);
  r.schedule_certified = !c.run.certify || r.schedule_report.ok;

  std::optional<Comparator> cmp;
  if (c.run.saddle_comparator) cmp = saddle_oracle(p);

  const Index K = c.run.seeds;
  r.seeds.resize(static_cast<size_t>(K));
  std::atomic<Index> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (Index i; (i = next++) < K;) {
      try {
        r.seeds[static_cast<size_t>(i)] = run_seed(c, p, m, cmp, c.run.seed + static_cast<std::uint64_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const int workers = static_cast<int>(std::min<Index>(threads_from_env(), K));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  std::sort(r.seeds.begin(), r.seeds.end(), [](const SeedResult& a, const SeedResult& b) { return a.seed < b.seed; });

  if (cmp && c.run.certify) {
    if (c.solver.method == SolverKind::Full) {
      for (const auto& s : r.seeds)
        if (s.certificate_excess && *s.certificate_excess > 1e-8) r.trajectory_certified = false;
      r.trajectory_note = "deterministic certificate at every iteration, relative slack 1e-8";
    } else if (K < 2) {
      r.trajectory_note = "expectation certificate skipped: needs at least 2 seeds";
    } else {
      for (size_t i = 0; i < r.seeds.front().certificate_lhs.size(); ++i) {
        std::vector<double> lhs;
        for (const auto& s : r.seeds) lhs.push_back(s.certificate_lhs[i]);
        const auto l = mean_se(lhs);
        if (l.mean > r.seeds.front().certificate_rhs + 3 * l.se) r.trajectory_certified = false;
      }
      r.trajectory_note = "expectation certificate at every checkpoint: mean <= rhs + 3 SE";
    }
  } else {
    r.trajectory_note = "trajectory certificate disabled";
  }
  write_summary(r, p, m);
  return r;
}

// ---------------------------------------------------------------- compare

std::vector<CompareEntry> compare_runs(const std::vector<std::string>& dirs, double eps, bool use_fixed) {
  std::vector<CompareEntry> out;
  for (const auto& d : dirs) {
    CompareEntry e;
    e.dir = d;
    e.label = fs::path(d).filename().string();
    std::ifstream in(fs::path(d) / "summary.json");
    if (!in) {
      out.push_back(e);
      continue;
    }
    json j;
    try {
      in >> j;
      const auto& s = j.at("config").at("solver");
      const auto method = s.at("method").get<std::string>();
      e.label += " (" + method;
      if (method != "full")
        e.label += "/" + s.at("strategy").get<std::string>() + "/" + s.at("sampling").get<std::string>();
      e.label += ")";
      std::vector<double> reach, finals;
      for (const auto& seed : j.at("seeds")) {
        const auto sd = seed.at("seed").get<std::uint64_t>();
        std::ifstream tin(fs::path(d) / ("trace_seed" + std::to_string(sd) + ".csv"));
        if (!tin) throw ParseError("missing trace");
        double hit = std::numeric_limits<double>::infinity(), last = kNaN;
        for (const auto& row : read_trace(tin)) {
          const double g = use_fixed ? row.gap_fixed : row.gap_best_response;
          if (std::isnan(g)) continue;
          last = g;
          if (g <= eps && std::isinf(hit)) hit = static_cast<double>(row.oracle_calls);
        }
        reach.push_back(hit);
        finals.push_back(last);
      }
      if (reach.empty()) throw ParseError("no seeds");
      std::sort(reach.begin(), reach.end());
      std::sort(finals.begin(), finals.end());
      const double med = reach[reach.size() / 2];
      if (std::isfinite(med)) e.median_calls = med;
      e.final_gap = finals[finals.size() / 2];
      e.present = true;
    } catch (const std::exception&) {
      e.present = false;
    }
    out.push_back(e);
  }
  return out;
}

void print_compare(std::ostream& os, const std::vector<CompareEntry>& rows, double eps) {
  size_t w = 3;
  for (const auto& r : rows) w = std::max(w, r.label.size());
  os << std::left << std::setw(static_cast<int>(w)) << "run" << "  " << std::setw(22)
     << ("calls to " + fmt_double(eps)) << "final gap (median)\n";
  for (const auto& r : rows) {
    os << std::setw(static_cast<int>(w)) << r.label << "  ";
    if (!r.present) {
      os << std::setw(22) << "absent" << "-\n";
      continue;
    }
    os << std::setw(22) << (r.median_calls ? fmt_double(*r.median_calls) : "not reached") << fmt_double(r.final_gap)
       << '\n';
  }
}

}  // namespace dlsp
