#include <benchmark/benchmark.h>

#include "osmm/linalg.hpp"
#include "osmm/qp.hpp"
#include "osmm/rng.hpp"

namespace {

// Random strictly feasible QP: x = 0 satisfies every inequality with slack.
osmm::QpProblem random_qp(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  osmm::Rng rng(seed);
  osmm::QpProblem qp = osmm::QpProblem::zeros(n);
  qp.quad_factor = osmm::Matrix(n, n / 2);
  for (Eigen::Index i = 0; i < qp.quad_factor.size(); ++i) qp.quad_factor.data()[i] = rng.normal();
  qp.quad_diag = osmm::Vector::Constant(n, 1e-2);
  for (Eigen::Index i = 0; i < n; ++i) qp.linear(i) = rng.normal();
  qp.ineq_matrix = osmm::Matrix(m, n);
  qp.ineq_rhs = osmm::Vector(m);
  for (Eigen::Index i = 0; i < qp.ineq_matrix.size(); ++i) qp.ineq_matrix.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < m; ++i) qp.ineq_rhs(i) = rng.uniform(0.1, 1.0);
  qp.eq_matrix = osmm::Matrix::Ones(1, n);
  qp.eq_rhs = osmm::Vector::Zero(1);
  return qp;
}

void BM_SolveQp(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const osmm::QpProblem qp = random_qp(n, 2 * n, 42);
  for (auto _ : state) {
    const osmm::QpSolution sol = osmm::solve_qp(qp);
    benchmark::DoNotOptimize(sol.objective);
  }
}
BENCHMARK(BM_SolveQp)->Arg(10)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_LdlFactor(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  osmm::Rng rng(7);
  osmm::Matrix B(n, n);
  for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = rng.normal();
  osmm::Matrix K = osmm::Matrix::Zero(n + 1, n + 1);
  K.topLeftCorner(n, n) = B * B.transpose();
  K.block(n, 0, 1, n).setOnes();
  K.block(0, n, n, 1).setOnes();
  for (auto _ : state) {
    osmm::LdlFactor f(K, 1e-9, n);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_LdlFactor)->Arg(50)->Arg(200)->Unit(benchmark::kMicrosecond);

}  // namespace
