#include "osmm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "osmm/risk.hpp"

namespace osmm {

namespace {

// RNG stream ids: model parameters are drawn from (seed, kParams); samples from
// (sample_seed, kSamples), where the validation twin uses sample_seed = seed + 1.
constexpr std::uint64_t kParamsStream = 1;
constexpr std::uint64_t kSamplesStream = 2;
constexpr std::uint64_t kDataStream = 3;

// Standard normal 80th percentile.
constexpr double kZ80 = 0.8416212335729143;

constexpr double kNewsvendorAlphaFloor = 1e-6;

Matrix normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
  }
  return M;
}

Vector uniform_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

const Matrix& require_array(const ArrayMap& arrays, const std::string& name) {
  const auto it = arrays.find(name);
  if (it == arrays.end()) throw Error(ErrorCode::InvalidArgument, "instance is missing array '" + name + "'");
  return it->second;
}

std::shared_ptr<const Vector> optional_weights(const ArrayMap& arrays, const std::string& prefix,
                                               Eigen::Index N) {
  const auto it = arrays.find(prefix + "weights");
  if (it == arrays.end()) return nullptr;
  if (it->second.size() != N || (it->second.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "importance weights must be positive, one per sample");
  }
  return std::make_shared<const Vector>(Eigen::Map<const Vector>(it->second.data(), N));
}

Vector column(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

// ---------------------------------------------------------------- oracles

Oracle::Callback kelly_callback(const ArrayMap& arrays, const std::string& prefix) {
  auto pi = std::make_shared<const Vector>(column(require_array(arrays, prefix + "pi")));
  auto R = std::make_shared<const Matrix>(require_array(arrays, prefix + "returns"));
  if (pi->size() != R->rows()) throw Error(ErrorCode::DimensionMismatch, "kelly: pi and returns differ");
  return [pi, R](const Vector& x, bool need_gradient) -> OracleEval {
    const Vector rx = *R * x;
    if ((rx.array() <= 0.0).any()) return OracleEval::outside();
    OracleEval out;
    out.value = -(pi->array() * rx.array().log()).sum();
    if (need_gradient) {
      const Vector w = pi->array() / rx.array();
      out.gradient = -(R->transpose() * w);
    }
    return out;
  };
}

Oracle::Callback cvar_callback(const ArrayMap& arrays, const std::string& prefix, double eta) {
  auto R = std::make_shared<const Matrix>(require_array(arrays, prefix + "returns"));
  auto weights = optional_weights(arrays, prefix, R->rows());
  const double scale = 1.0 / (static_cast<double>(R->rows()) * (1.0 - eta));
  return [R, weights, scale](const Vector& x, bool need_gradient) -> OracleEval {
    const Eigen::Index n = R->cols();
    const double alpha = x(n);
    const Vector excess = (-(*R * x.head(n))).array() - alpha;
    // Subgradient convention: the hinge has slope 0 at the kink.
    Vector active = (excess.array() > 0.0).cast<double>();
    if (weights) active.array() *= weights->array();
    OracleEval out;
    Vector pos = excess.array().max(0.0);
    if (weights) pos.array() *= weights->array();
    out.value = alpha + scale * pos.sum();
    if (need_gradient) {
      Vector grad(n + 1);
      grad.head(n) = -scale * (R->transpose() * active);
      grad(n) = 1.0 - scale * active.sum();
      out.gradient = std::move(grad);
    }
    return out;
  };
}

Oracle::Callback density_callback(const ArrayMap& arrays, double cell_weight) {
  auto Phi = std::make_shared<const Matrix>(require_array(arrays, "features"));
  const double log_w = std::log(cell_weight);
  return [Phi, log_w](const Vector& theta, bool need_gradient) -> OracleEval {
    const Vector u = -(*Phi * theta);
    const double top = u.maxCoeff();
    const Vector e = (u.array() - top).exp();
    const double s = e.sum();
    OracleEval out;
    out.value = top + std::log(s) + log_w;
    if (need_gradient) out.gradient = -(Phi->transpose() * e) / s;
    return out;
  };
}

Oracle::Callback newsvendor_callback(const ArrayMap& arrays, const std::string& prefix, double eta) {
  auto D = std::make_shared<const Matrix>(require_array(arrays, prefix + "demand"));
  auto P = std::make_shared<const Matrix>(require_array(arrays, prefix + "price"));
  auto a = std::make_shared<const Vector>(column(require_array(arrays, "a")));
  auto b = std::make_shared<const Vector>(column(require_array(arrays, "b")));
  if (D->rows() != P->rows() || D->cols() != P->cols() || D->cols() != a->size()) {
    throw Error(ErrorCode::DimensionMismatch, "newsvendor: inconsistent sample shapes");
  }
  auto weights = optional_weights(arrays, prefix, D->rows());
  const double log_shift = -std::log(static_cast<double>(D->rows())) - std::log1p(-eta);
  return [D, P, a, b, weights, log_shift](const Vector& x, bool need_gradient) -> OracleEval {
    const Eigen::Index n = D->cols();
    const Eigen::Index N = D->rows();
    const Vector q = x.head(n);
    const double alpha = x(n);
    if (!(alpha >= kNewsvendorAlphaFloor)) return OracleEval::outside();
    const double cost = production_cost(*a, *b, q);
    // loss_i = -p_i^T min(q, d_i) + phi(q)
    Vector loss(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      double revenue = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) revenue += (*P)(i, j) * std::min(q(j), (*D)(i, j));
      loss(i) = cost - revenue;
    }
    Vector u = loss / alpha;
    if (weights) u.array() += weights->array().log();
    const double top = u.maxCoeff();
    const Vector e = (u.array() - top).exp();
    const double s = e.sum();
    const double inner = top + std::log(s) + log_shift;
    OracleEval out;
    out.value = alpha * inner;
    if (need_gradient) {
      const Vector w = e / s;
      Vector grad = Vector::Zero(n + 1);
      // d min(q, d)/dq = 1[q <= d]; d (q - b)_+/dq = 1[q > b].
      for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (q(j) <= (*D)(i, j)) grad(j) -= w(i) * (*P)(i, j);
        }
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        grad(j) += (*a)(j) * (1.0 + (q(j) > (*b)(j) ? 0.5 : 0.0));
      }
      grad(n) = inner - w.dot(loss) / alpha;
      out.gradient = std::move(grad);
    }
    return out;
  };
}

// ------------------------------------------------------------ generators

void kelly_samples(std::uint64_t sample_seed, Eigen::Index n, Eigen::Index N, const Vector& rbar,
                   Matrix& pi_out, Matrix& returns) {
  Rng rng(sample_seed, kSamplesStream);
  Vector pi = uniform_vector(rng, N, 0.0, 1.0);
  pi /= pi.sum();
  returns = normal_matrix(rng, N, n).array().exp();
  const Vector mean = returns.transpose() * pi;
  for (Eigen::Index j = 0; j < n; ++j) returns.col(j) *= rbar(j) / mean(j);
  pi_out = pi;
}

struct CvarMarket {
  Vector mu;
  Matrix chol;  // lower Cholesky factor of Sigma
  Vector strike_call, strike_put, premium_call, premium_put, forward, sigma;
};

Matrix cvar_returns(std::uint64_t sample_seed, const CvarMarket& mk, Eigen::Index N) {
  const Eigen::Index m = mk.mu.size();
  Rng rng(sample_seed, kSamplesStream);
  const Matrix xi = normal_matrix(rng, N, m);
  Matrix log_omega = xi * mk.chol.transpose();
  log_omega.rowwise() += mk.mu.transpose();
  Matrix R(N, 3 * m);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double omega = std::exp(log_omega(i, j));
      R(i, j) = omega;
      R(i, m + j) = std::max(omega - mk.strike_call(j), 0.0) / mk.premium_call(j);
      R(i, 2 * m + j) = std::max(mk.strike_put(j) - omega, 0.0) / mk.premium_put(j);
    }
  }
  return R;
}

void newsvendor_samples(std::uint64_t sample_seed, const Vector& mu, const Matrix& F,
                        Eigen::Index N, Matrix& demand, Matrix& price) {
  const Eigen::Index n2 = mu.size();
  const Eigen::Index n = n2 / 2;
  Rng rng(sample_seed, kSamplesStream);
  const Matrix xi = normal_matrix(rng, N, F.cols());
  Matrix z = std::sqrt(0.1) * (xi * F.transpose());
  z.rowwise() += mu.transpose();
  const Matrix ez = z.array().exp();
  demand = ez.leftCols(n);
  price = ez.rightCols(n);
}

Vector newsvendor_losses(const Matrix& D, const Matrix& P, const Vector& a, const Vector& b,
                         const Vector& q) {
  const double cost = production_cost(a, b, q);
  Vector loss(D.rows());
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    double revenue = 0.0;
    for (Eigen::Index j = 0; j < D.cols(); ++j) revenue += P(i, j) * std::min(q(j), D(i, j));
    loss(i) = cost - revenue;
  }
  return loss;
}

void require_positive(Eigen::Index value, Eigen::Index minimum, const char* what) {
  if (value < minimum) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

bool ProblemInstance::has_validation() const {
  for (const auto& [name, _] : arrays) {
    if (name.rfind("val.", 0) == 0) return true;
  }
  return false;
}

double ProblemInstance::param(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw Error(ErrorCode::InvalidArgument, "instance is missing parameter '" + key + "'");
  return it->second;
}

Oracle ProblemInstance::make_oracle() const {
  const Eigen::Index n = dim();
  const bool val = has_validation();
  if (kind == "kelly") {
    return Oracle(n, kelly_callback(arrays, ""), val ? kelly_callback(arrays, "val.") : nullptr);
  }
  if (kind == "cvar") {
    const double eta = param("eta");
    return Oracle(n, cvar_callback(arrays, "", eta), val ? cvar_callback(arrays, "val.", eta) : nullptr);
  }
  if (kind == "density") {
    return Oracle(n, density_callback(arrays, param("cell_weight")));
  }
  if (kind == "newsvendor") {
    const double eta = param("eta");
    return Oracle(n, newsvendor_callback(arrays, "", eta),
                  val ? newsvendor_callback(arrays, "val.", eta) : nullptr);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown problem kind '" + kind + "'");
}

ProblemInstance gen_kelly(Eigen::Index n, Eigen::Index N, std::uint64_t seed, bool with_validation) {
  require_positive(n, 2, "kelly: n must be >= 2");
  require_positive(N, 1, "kelly: N must be >= 1");
  ProblemInstance inst;
  inst.kind = "kelly";
  inst.params = {{"n", double(n)}, {"N", double(N)}, {"seed", double(seed)}};
  Rng prm(seed, kParamsStream);
  const Vector rbar = uniform_vector(prm, n, 0.9, 1.1);
  kelly_samples(seed, n, N, rbar, inst.arrays["pi"], inst.arrays["returns"]);
  if (with_validation) kelly_samples(seed + 1, n, N, rbar, inst.arrays["val.pi"], inst.arrays["val.returns"]);
  inst.arrays["mean_return"] = rbar;

  inst.g = StructuredFunction(n);
  SimplexAtom simplex;
  for (Eigen::Index j = 0; j < n; ++j) simplex.coords.push_back(j);
  inst.g.simplex = simplex;
  inst.x0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return inst;
}

ProblemInstance gen_cvar_portfolio(Eigen::Index m, Eigen::Index N, std::uint64_t seed, double eta,
                                   double x_min, double leverage, bool with_validation) {
  require_positive(m, 2, "cvar: m must be >= 2");
  require_positive(N, 1, "cvar: N must be >= 1");
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::InvalidArgument, "cvar: eta must lie in (0,1)");
  ProblemInstance inst;
  inst.kind = "cvar";
  inst.params = {{"m", double(m)}, {"N", double(N)}, {"seed", double(seed)}, {"eta", eta},
                 {"x_min", x_min}, {"leverage", leverage}};

  Rng prm(seed, kParamsStream);
  const Matrix F = normal_matrix(prm, m, 5);
  const Matrix Sigma = 0.5 * (Matrix::Identity(m, m) + 0.2 * F * F.transpose());
  CvarMarket mk;
  mk.mu.resize(m);
  mk.sigma.resize(m);
  mk.forward.resize(m);
  mk.strike_call.resize(m);
  mk.strike_put.resize(m);
  mk.premium_call.resize(m);
  mk.premium_put.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double s2 = Sigma(j, j);
    const double s = std::sqrt(s2);
    mk.mu(j) = 0.03 * s - 0.5 * s2;
    mk.sigma(j) = s;
    mk.forward(j) = std::exp(mk.mu(j) + 0.5 * s2);
    mk.strike_call(j) = std::exp(mk.mu(j) + kZ80 * s);
    mk.strike_put(j) = std::exp(mk.mu(j) - kZ80 * s);
    mk.premium_call(j) = black_scholes_call(mk.forward(j), mk.strike_call(j), s);
    mk.premium_put(j) = black_scholes_put(mk.forward(j), mk.strike_put(j), s);
  }
  const Eigen::LLT<Matrix> llt(Sigma);
  mk.chol = llt.matrixL();

  inst.arrays["returns"] = cvar_returns(seed, mk, N);
  if (with_validation) inst.arrays["val.returns"] = cvar_returns(seed + 1, mk, N);
  inst.arrays["strike_call"] = mk.strike_call;
  inst.arrays["strike_put"] = mk.strike_put;
  inst.arrays["premium_call"] = mk.premium_call;
  inst.arrays["premium_put"] = mk.premium_put;
  inst.arrays["forward"] = mk.forward;
  inst.arrays["sigma"] = mk.sigma;

  const Eigen::Index n = 3 * m;
  StructuredFunction g(n + 1);
  Box box{Vector::Constant(n + 1, x_min), Vector::Constant(n + 1, kInf)};
  box.lower(n) = -kInf;
  g.box = box;
  EqualityAtom budget{Matrix::Zero(1, n + 1), Vector::Ones(1)};
  budget.A.leftCols(n).setOnes();
  g.equalities = budget;
  L1BallAtom ball;
  for (Eigen::Index j = 0; j < n; ++j) ball.coords.push_back(j);
  ball.radius = leverage;
  g.l1_ball = ball;
  inst.g = g;

  Vector x0 = Vector::Zero(n + 1);
  x0.head(m).setConstant(1.0 / static_cast<double>(m));
  const Vector losses = -(inst.arrays["returns"] * x0.head(n));
  x0(n) = empirical_risks(losses, eta).var;
  inst.x0 = x0;
  return inst;
}

DensityRegularizer parse_density_regularizer(const std::string& name) {
  if (name == "l2") return DensityRegularizer::L2;
  if (name == "grad" || name == "gradient") return DensityRegularizer::Gradient;
  throw Error(ErrorCode::InvalidArgument, "unknown density regularizer '" + name + "' (use l2 or grad)");
}

ProblemInstance gen_density(Eigen::Index N_grid, Eigen::Index m_data, std::uint64_t seed,
                            double lambda, DensityRegularizer regularizer, double box) {
  const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(N_grid))));
  if (N_grid < 1 || side * side != N_grid) {
    throw Error(ErrorCode::InvalidArgument, "density: N_grid must be a perfect square");
  }
  require_positive(m_data, 1, "density: m_data must be >= 1");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "density: lambda must be >= 0");
  const auto& terms = legendre_terms();
  const auto n = static_cast<Eigen::Index>(terms.size());

  ProblemInstance inst;
  inst.kind = "density";
  const double cell_weight = 4.0 / static_cast<double>(N_grid);
  inst.params = {{"N_grid", double(N_grid)},
                 {"m_data", double(m_data)},
                 {"seed", double(seed)},
                 {"lambda", lambda},
                 {"regularizer", regularizer == DensityRegularizer::L2 ? 0.0 : 1.0},
                 {"box", box},
                 {"cell_weight", cell_weight}};

  // Riemann-sum lattice: cell midpoints of a side x side grid on [-1, 1]^2.
  Matrix features(N_grid, n);
  Matrix Q = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < side; ++i) {
    const double z1 = -1.0 + (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(side);
    for (Eigen::Index j = 0; j < side; ++j) {
      const double z2 = -1.0 + (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(side);
      features.row(i * side + j) = legendre_features(z1, z2).transpose();
      if (regularizer == DensityRegularizer::Gradient) {
        const Matrix J = legendre_jacobian(z1, z2);
        Q.noalias() += J * J.transpose();
      }
    }
  }
  Q *= cell_weight;
  inst.arrays["features"] = features;

  // Data: three-component Gaussian mixture restricted to the square.
  Rng rng(seed, kDataStream);
  const double means[3][2] = {{1.0 / 3, 1.0 / 3}, {1.0 / 3, -1.0 / 3}, {-1.0 / 3, -1.0 / 3}};
  const double cumulative[3] = {0.4, 0.7, 1.0};
  Matrix data(m_data, 2);
  Vector stats = Vector::Zero(n);
  for (Eigen::Index i = 0; i < m_data;) {
    const double u = rng.uniform();
    const int c = u < cumulative[0] ? 0 : (u < cumulative[1] ? 1 : 2);
    const double z1 = means[c][0] + rng.normal() / 6.0;
    const double z2 = means[c][1] + rng.normal() / 6.0;
    if (std::abs(z1) > 1.0 || std::abs(z2) > 1.0) continue;
    data(i, 0) = z1;
    data(i, 1) = z2;
    stats += legendre_features(z1, z2);
    ++i;
  }
  inst.arrays["data"] = data;
  inst.arrays["data_stats"] = stats;

  StructuredFunction g(n);
  g.linear_cost = stats / static_cast<double>(m_data);
  if (lambda > 0.0) {
    if (regularizer == DensityRegularizer::L2) {
      g.quad_factor = Matrix(std::sqrt(2.0 * lambda) * Matrix::Identity(n, n));
    } else {
      const Eigen::SelfAdjointEigenSolver<Matrix> eig(Q);
      const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      g.quad_factor = Matrix(std::sqrt(2.0 * lambda) * (eig.eigenvectors() * root.asDiagonal()));
    }
  }
  g.box = Box{Vector::Constant(n, -box), Vector::Constant(n, box)};
  inst.g = g;
  inst.x0 = Vector::Zero(n);
  return inst;
}

ProblemInstance gen_newsvendor(Eigen::Index n, Eigen::Index N, std::uint64_t seed, double eta,
                               double phi_max, bool with_validation) {
  require_positive(n, 1, "newsvendor: n must be >= 1");
  require_positive(N, 1, "newsvendor: N must be >= 1");
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::InvalidArgument, "newsvendor: eta must lie in (0,1)");
  if (!(phi_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "newsvendor: phi_max must be > 0");
  ProblemInstance inst;
  inst.kind = "newsvendor";
  inst.params = {{"n", double(n)}, {"N", double(N)}, {"seed", double(seed)}, {"eta", eta},
                 {"phi_max", phi_max}, {"alpha_floor", kNewsvendorAlphaFloor}};

  Rng prm(seed, kParamsStream);
  const Vector mu = uniform_vector(prm, 2 * n, -0.2, 0.0);
  const Matrix F = normal_matrix(prm, 2 * n, 5);
  const Vector a = uniform_vector(prm, n, 0.2, 0.9);
  const Vector b = uniform_vector(prm, n, 0.01, 0.03);
  newsvendor_samples(seed, mu, F, N, inst.arrays["demand"], inst.arrays["price"]);
  if (with_validation) {
    newsvendor_samples(seed + 1, mu, F, N, inst.arrays["val.demand"], inst.arrays["val.price"]);
  }
  inst.arrays["a"] = a;
  inst.arrays["b"] = b;
  const Vector q_max = 5.0 * b;

  StructuredFunction g(n + 1);
  Box box{Vector::Zero(n + 1), Vector::Constant(n + 1, kInf)};
  box.upper.head(n) = q_max;
  box.lower(n) = kNewsvendorAlphaFloor;
  g.box = box;
  HingeBudgetAtom budget;
  for (Eigen::Index j = 0; j < n; ++j) budget.coords.push_back(j);
  budget.linear = a;
  budget.hinge = 0.5 * a;
  budget.kink = b;
  budget.budget = phi_max;
  g.hinge_budget = budget;
  inst.g = g;

  // Start at half capacity, scaled down onto 90% of the budget if needed.
  Vector q0 = 0.5 * q_max;
  if (production_cost(a, b, q0) > 0.9 * phi_max) {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (production_cost(a, b, mid * q0) > 0.9 * phi_max ? hi : lo) = mid;
    }
    q0 *= lo;
  }
  const Vector losses = newsvendor_losses(inst.arrays["demand"], inst.arrays["price"], a, b, q0);
  const double mean = losses.mean();
  double alpha0 = std::sqrt((losses.array() - mean).square().mean());
  if (!(alpha0 > kNewsvendorAlphaFloor)) alpha0 = 1.0;
  inst.x0 = Vector(n + 1);
  inst.x0 << q0, alpha0;
  return inst;
}

Vector random_interior_point(const ProblemInstance& inst, Rng& rng) {
  const Eigen::Index n = inst.dim();
  if (inst.kind == "kelly") {
    Vector w(n);
    for (Eigen::Index j = 0; j < n; ++j) w(j) = -std::log(1.0 - rng.uniform());
    return Vector(0.5 / static_cast<double>(n) + 0.5 * (w / w.sum()).array());
  }
  if (inst.kind == "cvar") {
    Vector x = Vector::Zero(n);
    const Eigen::Index k = n - 1;
    Vector w(k);
    for (Eigen::Index j = 0; j < k; ++j) w(j) = -std::log(1.0 - rng.uniform());
    x.head(k) = w / w.sum();
    x(k) = inst.x0(k) * rng.uniform(0.5, 1.5);
    return x;
  }
  if (inst.kind == "density") {
    Vector theta(n);
    for (Eigen::Index j = 0; j < n; ++j) theta(j) = 0.5 * rng.normal();
    return theta;
  }
  if (inst.kind == "newsvendor") {
    Vector x = inst.x0;
    const Matrix& b = inst.arrays.at("b");
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      // Stay clear of the production-cost kink at q = b.
      double q = 0.0;
      do {
        q = inst.x0(j) * rng.uniform(0.2, 1.0);
      } while (std::abs(q - b(j, 0)) <= 1e-3 * b(j, 0));
      x(j) = q;
    }
    x(n - 1) *= rng.uniform(0.5, 2.0);
    return x;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown problem kind '" + inst.kind + "'");
}

double legendre(int degree, double x) {
  switch (degree) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return 0.5 * (3.0 * x * x - 1.0);
    case 3: return 0.5 * (5.0 * x * x * x - 3.0 * x);
    case 4: return (35.0 * x * x * x * x - 30.0 * x * x + 3.0) / 8.0;
    default: throw Error(ErrorCode::InvalidArgument, "legendre: degree must lie in [0, 4]");
  }
}

double legendre_derivative(int degree, double x) {
  switch (degree) {
    case 0: return 0.0;
    case 1: return 1.0;
    case 2: return 3.0 * x;
    case 3: return 0.5 * (15.0 * x * x - 3.0);
    case 4: return (140.0 * x * x * x - 60.0 * x) / 8.0;
    default: throw Error(ErrorCode::InvalidArgument, "legendre: degree must lie in [0, 4]");
  }
}

const std::vector<std::pair<int, int>>& legendre_terms() {
  static const std::vector<std::pair<int, int>> terms = [] {
    std::vector<std::pair<int, int>> t;
    for (int d = 1; d <= 4; ++d) {
      for (int a = d; a >= 0; --a) t.emplace_back(a, d - a);
    }
    return t;
  }();
  return terms;
}

Vector legendre_features(double z1, double z2) {
  const auto& terms = legendre_terms();
  Vector phi(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t k = 0; k < terms.size(); ++k) {
    phi(static_cast<Eigen::Index>(k)) = legendre(terms[k].first, z1) * legendre(terms[k].second, z2);
  }
  return phi;
}

Matrix legendre_jacobian(double z1, double z2) {
  const auto& terms = legendre_terms();
  Matrix J(static_cast<Eigen::Index>(terms.size()), 2);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto [a, b] = terms[k];
    const auto r = static_cast<Eigen::Index>(k);
    J(r, 0) = legendre_derivative(a, z1) * legendre(b, z2);
    J(r, 1) = legendre(a, z1) * legendre_derivative(b, z2);
  }
  return J;
}

double production_cost(const Vector& a, const Vector& b, const Vector& q) {
  return a.dot(q) + 0.5 * a.dot((q - b).cwiseMax(0.0));
}

}  // namespace osmm
