#include "dlsp/zoo.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <tuple>

namespace dlsp {

LossKind loss_from_string(const std::string& s) {
  if (s == "squared") return LossKind::Squared;
  if (s == "logistic") return LossKind::Logistic;
  if (s == "huber") return LossKind::Huber;
  throw ConfigError("unknown loss '" + s + "'");
}

DualPenalty penalty_from_string(const std::string& s) {
  if (s == "kl") return DualPenalty::KL;
  if (s == "chi2") return DualPenalty::Chi2;
  if (s == "ball-l2") return DualPenalty::BallL2;
  throw ConfigError("unknown dual penalty '" + s + "'");
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::Squared: return "squared";
    case LossKind::Logistic: return "logistic";
    case LossKind::Huber: return "huber";
  }
  return "?";
}

std::string to_string(DualPenalty k) {
  switch (k) {
    case DualPenalty::KL: return "kl";
    case DualPenalty::Chi2: return "chi2";
    case DualPenalty::BallL2: return "ball-l2";
  }
  return "?";
}

namespace {

// Largest loss value over the box when |z'x| <= s.
double loss_sup(LossKind k, double s, double b, double delta) {
  const double r = s + std::abs(b);
  switch (k) {
    case LossKind::Squared: return 0.5 * r * r;
    case LossKind::Logistic: return std::log1p(std::exp(std::abs(b) * s));
    case LossKind::Huber: return r <= delta ? 0.5 * r * r : delta * (r - 0.5 * delta);
  }
  return 0;
}

PartitionSpec partition_spec(Index blocks, std::vector<IndexList> explicit_blocks = {}) {
  PartitionSpec ps;
  ps.num_blocks = blocks;
  ps.blocks = std::move(explicit_blocks);
  return ps;
}

}  // namespace

ProblemPtr make_dro(const RowMat& features, const Vec& targets, const DroOptions& opt) {
  const Index n = features.rows(), d = features.cols();
  if (n == 0 || d == 0) throw DomainError("empty dataset");
  if (targets.size() != n) throw DomainError("targets do not match the number of samples");
  if (opt.nu < 0 || opt.mu < 0) throw ConvexityError("negative regularization");

  ProblemSpec spec;
  spec.d = d;
  for (Index j = 0; j < n; ++j) {
    Vec z = features.row(j).transpose();
    switch (opt.loss) {
      case LossKind::Squared: spec.components.push_back(std::make_shared<SquaredAffineComponent>(z, targets[j])); break;
      case LossKind::Logistic: spec.components.push_back(std::make_shared<LogisticComponent>(z, targets[j])); break;
      case LossKind::Huber:
        spec.components.push_back(std::make_shared<HuberComponent>(z, targets[j], opt.huber_delta));
        break;
    }
  }
  spec.partition = partition_spec(opt.blocks, opt.partition);
  spec.domain_x = opt.radius > 0 ? Domain::box(d, -opt.radius, opt.radius) : Domain::full();
  spec.phi = opt.mu > 0 ? ProxFunction::quadratic(opt.mu) : ProxFunction::zero();

  const Vec uniform = Vec::Constant(n, 1.0 / static_cast<double>(n));
  switch (opt.penalty) {
    case DualPenalty::KL:
      spec.domain_y = Domain::simplex();
      spec.geom_y = GeometryKind::EntropySimplex;
      spec.psi = opt.nu > 0 ? ProxFunction::entropic(opt.nu, uniform) : ProxFunction::zero();
      break;
    case DualPenalty::Chi2:
      spec.domain_y = Domain::simplex();
      spec.psi = opt.nu > 0 ? ProxFunction::quadratic(opt.nu, uniform) : ProxFunction::zero();
      break;
    case DualPenalty::BallL2: {
      if (!(opt.nu > 0)) throw DegenerateConstants("ball-l2 penalty needs nu > 0");
      spec.domain_y = Domain::orthant();
      spec.psi = ProxFunction::quadratic(opt.nu, uniform);
      if (opt.radius > 0) {
        // y_j* = max(0, 1/n + f_j(x)/nu) is bounded by the largest loss on the box.
        Vec D(n);
        for (Index j = 0; j < n; ++j) {
          const double s = opt.radius * features.row(j).lpNorm<1>();
          D[j] = uniform[j] + loss_sup(opt.loss, s, targets[j], opt.huber_delta) / opt.nu;
        }
        spec.dual_bound = D;
      }
      break;
    }
  }
  return build_problem(std::move(spec));
}

ProblemPtr make_matrix_game(const RowMat& A, Index blocks) {
  if (A.rows() == 0 || A.cols() == 0) throw DomainError("empty payoff matrix");
  ProblemSpec spec;
  spec.d = A.cols();
  for (Index i = 0; i < A.rows(); ++i)
    spec.components.push_back(std::make_shared<AffineComponent>(Vec(A.row(i).transpose()), 0.0));
  spec.partition = partition_spec(blocks);
  spec.domain_x = Domain::simplex();
  spec.domain_y = Domain::simplex();
  spec.geom_x = GeometryKind::EntropySimplex;
  spec.geom_y = GeometryKind::EntropySimplex;
  return build_problem(std::move(spec));
}

ProblemPtr make_constrained(Index d, const ProxFunction& phi, std::vector<ComponentPtr> constraints,
                            const ConstrainedOptions& opt) {
  if (constraints.empty()) throw DomainError("no constraints");
  ProblemSpec spec;
  spec.d = d;
  spec.components = std::move(constraints);
  spec.partition = partition_spec(opt.blocks);
  spec.domain_x = opt.domain_x;
  spec.domain_y = Domain::orthant();
  spec.phi = phi;
  spec.psi = opt.nu > 0 ? ProxFunction::quadratic(opt.nu) : ProxFunction::zero();
  spec.dual_bound = opt.dual_bound;
  return build_problem(std::move(spec));
}

ProblemPtr make_eigen_game(const std::vector<Eigen::MatrixXd>& A, Index m, const std::optional<Eigen::MatrixXd>& A0,
                           Index blocks) {
  if (m < 1 || m > 4) throw DomainError("eigenvalue game supports 1 <= m <= 4");
  if (A.empty()) throw DomainError("eigenvalue game needs at least one matrix");
  const Index d = static_cast<Index>(A.size());
  auto check = [&](const Eigen::MatrixXd& M) {
    if (M.rows() != m || M.cols() != m) throw DomainError("matrix has the wrong size");
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("matrix is not symmetric");
  };
  for (const auto& M : A) check(M);
  if (A0) check(*A0);

  ProblemSpec spec;
  spec.d = d;
  for (Index r = 0; r < m; ++r)
    for (Index c = 0; c < m; ++c) {
      Vec a(d);
      for (Index i = 0; i < d; ++i) a[i] = A[static_cast<size_t>(i)](r, c);
      spec.components.push_back(std::make_shared<AffineComponent>(a, A0 ? (*A0)(r, c) : 0.0));
    }
  spec.partition = partition_spec(blocks);
  spec.domain_x = Domain::box(d, -1.0, 1.0);
  spec.domain_y = Domain::spectraplex(m);
  return build_problem(std::move(spec));
}

ProblemPtr make_scalar_toy(double mu, double nu) {
  ProblemSpec spec;
  spec.d = 1;
  spec.components.push_back(std::make_shared<AffineComponent>(Vec::Ones(1), 0.0));
  spec.phi = mu > 0 ? ProxFunction::quadratic(mu) : ProxFunction::zero();
  spec.psi = nu > 0 ? ProxFunction::quadratic(nu) : ProxFunction::zero();
  return build_problem(std::move(spec));
}

ProblemPtr make_bilinear_toy(const RowMat& B, double mu, double nu, Index blocks) {
  ProblemSpec spec;
  spec.d = B.cols();
  for (Index j = 0; j < B.rows(); ++j)
    spec.components.push_back(std::make_shared<AffineComponent>(Vec(B.row(j).transpose()), 0.0));
  spec.partition = partition_spec(blocks);
  spec.phi = mu > 0 ? ProxFunction::quadratic(mu) : ProxFunction::zero();
  spec.psi = nu > 0 ? ProxFunction::quadratic(nu) : ProxFunction::zero();
  return build_problem(std::move(spec));
}

// ---------------------------------------------------------------- datasets

DataFormat format_from_string(const std::string& s) {
  if (s == "csv") return DataFormat::Csv;
  if (s == "svmlight" || s == "svm-light" || s == "libsvm") return DataFormat::SvmLight;
  throw ConfigError("unknown data format '" + s + "'");
}

namespace {

[[noreturn]] void bad_line(int line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

bool parse_double(const std::string& tok, double& out) {
  size_t a = tok.find_first_not_of(" \t\r");
  size_t b = tok.find_last_not_of(" \t\r");
  if (a == std::string::npos) return false;
  const std::string t = tok.substr(a, b - a + 1);
  try {
    size_t k = 0;
    out = std::stod(t, &k);
    return k == t.size();
  } catch (const std::logic_error&) {
    return false;
  }
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

Dataset from_rows(const std::vector<std::vector<double>>& rows, const std::vector<double>& y, Index d) {
  Dataset out;
  out.features = RowMat::Zero(static_cast<Index>(rows.size()), d);
  out.targets.resize(static_cast<Index>(y.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    out.targets[static_cast<Index>(i)] = y[i];
    for (size_t c = 0; c < rows[i].size(); ++c) out.features(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
  }
  return out;
}

Dataset read_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  std::string s;
  int line = 0;
  size_t width = 0;
  while (std::getline(is, s)) {
    ++line;
    if (blank(s)) continue;
    std::vector<std::string> toks;
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ',')) toks.push_back(t);
    std::vector<double> vals(toks.size());
    size_t numeric = 0;
    for (size_t i = 0; i < toks.size(); ++i) numeric += parse_double(toks[i], vals[i]);
    if (rows.empty() && numeric == 0) continue;  // header
    if (numeric != toks.size()) bad_line(line, "non-numeric field");
    if (toks.size() < 2) bad_line(line, "need at least one feature and a target");
    if (width == 0) width = toks.size();
    if (toks.size() != width)
      bad_line(line, "expected " + std::to_string(width) + " fields, got " + std::to_string(toks.size()));
    y.push_back(vals.back());
    vals.pop_back();
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError("no data rows");
  return from_rows(rows, y, static_cast<Index>(width - 1));
}

Dataset read_svmlight(std::istream& is) {
  std::vector<std::vector<std::pair<Index, double>>> entries;
  std::vector<double> y;
  std::string s;
  int line = 0;
  Index d = 0;
  while (std::getline(is, s)) {
    ++line;
    auto hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    if (blank(s)) continue;
    std::istringstream ss(s);
    std::string tok;
    ss >> tok;
    double label = 0;
    if (!parse_double(tok, label)) bad_line(line, "bad target '" + tok + "'");
    std::vector<std::pair<Index, double>> row;
    Index last = 0;
    while (ss >> tok) {
      auto c = tok.find(':');
      if (c == std::string::npos) bad_line(line, "expected index:value, got '" + tok + "'");
      double idx = 0, val = 0;
      if (!parse_double(tok.substr(0, c), idx) || idx != std::floor(idx) || idx < 1)
        bad_line(line, "bad feature index in '" + tok + "'");
      if (!parse_double(tok.substr(c + 1), val)) bad_line(line, "bad feature value in '" + tok + "'");
      const Index i = static_cast<Index>(idx);
      if (i <= last) bad_line(line, "feature indices must increase");
      last = i;
      row.emplace_back(i - 1, val);
      d = std::max(d, i);
    }
    y.push_back(label);
    entries.push_back(std::move(row));
  }
  if (entries.empty()) throw ParseError("no data rows");
  Dataset out;
  out.features = RowMat::Zero(static_cast<Index>(entries.size()), std::max<Index>(d, 1));
  out.targets = Eigen::Map<const Vec>(y.data(), static_cast<Index>(y.size()));
  for (size_t r = 0; r < entries.size(); ++r)
    for (const auto& [c, v] : entries[r]) out.features(static_cast<Index>(r), c) = v;
  return out;
}

}  // namespace

Dataset read_dataset(std::istream& is, DataFormat format) {
  return format == DataFormat::Csv ? read_csv(is) : read_svmlight(is);
}

Dataset load_dataset(const std::string& path, DataFormat format) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  return read_dataset(f, format);
}

void write_dataset(std::ostream& os, const Dataset& data, DataFormat format) {
  os << std::setprecision(17);
  for (Index r = 0; r < data.features.rows(); ++r) {
    if (format == DataFormat::Csv) {
      for (Index c = 0; c < data.features.cols(); ++c) os << data.features(r, c) << ',';
      os << data.targets[r] << '\n';
    } else {
      os << data.targets[r];
      for (Index c = 0; c < data.features.cols(); ++c)
        if (data.features(r, c) != 0) os << ' ' << c + 1 << ':' << data.features(r, c);
      os << '\n';
    }
  }
}

MatrixFormat matrix_format_from_string(const std::string& s) {
  if (s == "dense" || s == "csv") return MatrixFormat::Dense;
  if (s == "triplets" || s == "coo") return MatrixFormat::Triplets;
  throw ConfigError("unknown matrix format '" + s + "'");
}

RowMat read_matrix(std::istream& is, MatrixFormat format) {
  std::string s;
  int line = 0;
  if (format == MatrixFormat::Dense) {
    std::vector<std::vector<double>> rows;
    while (std::getline(is, s)) {
      ++line;
      if (blank(s)) continue;
      std::stringstream ss(s);
      std::string t;
      std::vector<double> row;
      while (std::getline(ss, t, ',')) {
        double v = 0;
        if (!parse_double(t, v)) bad_line(line, "non-numeric field '" + t + "'");
        row.push_back(v);
      }
      if (!rows.empty() && row.size() != rows.front().size())
        bad_line(line, "expected " + std::to_string(rows.front().size()) + " fields, got " + std::to_string(row.size()));
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("empty matrix");
    RowMat A(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < rows[i].size(); ++j) A(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return A;
  }
  std::vector<std::tuple<Index, Index, double>> entries;
  Index m = 0, n = 0;
  while (std::getline(is, s)) {
    ++line;
    auto hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    if (blank(s)) continue;
    std::istringstream ss(s);
    std::string a, b, c, extra;
    if (!(ss >> a >> b >> c) || (ss >> extra)) bad_line(line, "expected 'row col value'");
    double r = 0, k = 0, v = 0;
    if (!parse_double(a, r) || !parse_double(b, k) || r != std::floor(r) || k != std::floor(k) || r < 1 || k < 1)
      bad_line(line, "bad index");
    if (!parse_double(c, v)) bad_line(line, "bad value '" + c + "'");
    entries.emplace_back(static_cast<Index>(r) - 1, static_cast<Index>(k) - 1, v);
    m = std::max(m, static_cast<Index>(r));
    n = std::max(n, static_cast<Index>(k));
  }
  if (entries.empty()) throw ParseError("empty matrix");
  RowMat A = RowMat::Zero(m, n);
  for (const auto& [i, j, v] : entries) A(i, j) += v;
  return A;
}

RowMat load_matrix(const std::string& path, MatrixFormat format) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  return read_matrix(f, format);
}

void write_matrix(std::ostream& os, const RowMat& A, MatrixFormat format) {
  os << std::setprecision(17);
  for (Index i = 0; i < A.rows(); ++i) {
    if (format == MatrixFormat::Dense) {
      for (Index j = 0; j < A.cols(); ++j) os << (j ? "," : "") << A(i, j);
      os << '\n';
    } else {
      for (Index j = 0; j < A.cols(); ++j)
        if (A(i, j) != 0 || (i + 1 == A.rows() && j + 1 == A.cols())) os << i + 1 << ' ' << j + 1 << ' ' << A(i, j) << '\n';
    }
  }
}

Dataset synthetic_regression(Index n, Index d, std::uint64_t seed, double noise) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> N01(0.0, 1.0);
  Dataset out;
  out.features.resize(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) out.features(i, j) = N01(g);
  Vec w(d);
  for (Index j = 0; j < d; ++j) w[j] = N01(g);
  out.targets = out.features * w;
  for (Index i = 0; i < n; ++i) out.targets[i] += noise * N01(g);
  return out;
}

}  // namespace dlsp
