#include "ctr/nmf.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ctr/parallel.hpp"
#include "oracle_helpers.hpp"

namespace {

TEST(NmfObjective, ZeroFactorsGiveHalfEdgeCount) {
  std::mt19937 rng(1);
  Eigen::MatrixXd x = oracle::random_binary(10, 8, 0.4, rng);
  auto g = oracle::graph_from_dense(x);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(10, 3);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 8);
  EXPECT_DOUBLE_EQ(ctr::nmf_objective(g, w, h), 0.5 * g.n_edges);
}

TEST(NmfObjective, ExactFactorizationIsZero) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(6, 5);
  auto g = oracle::graph_from_dense(x);
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(6, 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Ones(1, 5);
  EXPECT_NEAR(ctr::nmf_objective(g, w, h), 0.0, 1e-12);
}

TEST(NmfObjective, MatchesDenseComputation) {
  std::mt19937 rng(2);
  Eigen::MatrixXd x = oracle::random_binary(10, 8, 0.5, rng);
  auto g = oracle::graph_from_dense(x);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd w(10, 4), h(4, 8);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = u(rng);
  for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = u(rng);
  double dense = 0.5 * (x - w * h).squaredNorm();
  EXPECT_NEAR(ctr::nmf_objective(g, w, h), dense, 1e-10);
}

TEST(NmfObjective, RejectsBadShapes) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 3);
  auto g = oracle::graph_from_dense(x);
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(4, 2);
  Eigen::MatrixXd h = Eigen::MatrixXd::Ones(3, 3);
  EXPECT_THROW(ctr::nmf_objective(g, w, h), ctr::DimensionError);
}

TEST(Nmf, RankOneRecovery) {
  auto g = oracle::graph_from_dense(Eigen::MatrixXd::Ones(12, 9));
  auto f = ctr::nmf_factorize(g, 1, 2000, 0.0, 5);
  double rel = f.residual_fro / std::sqrt(static_cast<double>(g.n_edges));
  EXPECT_LT(rel, 1e-3);
  EXPECT_GE(f.W.minCoeff(), 0.0);
  EXPECT_GE(f.H.minCoeff(), 0.0);
}

TEST(Nmf, ZeroIterationsReportInitialObjective) {
  std::mt19937 rng(3);
  Eigen::MatrixXd x = oracle::random_binary(15, 10, 0.3, rng);
  auto g = oracle::graph_from_dense(x);
  auto f = ctr::nmf_factorize(g, 3, 0, 1e-5, 9);
  ASSERT_EQ(f.objective_trace.size(), 1u);
  double dense = 0.5 * (x - f.W * f.H).squaredNorm();
  EXPECT_NEAR(f.objective_trace[0], dense, 1e-9);
}

TEST(Nmf, MatchesDenseOracleFromSameInit) {
  std::mt19937 rng(4);
  Eigen::MatrixXd x = oracle::random_binary(30, 20, 0.35, rng);
  auto g = oracle::graph_from_dense(x);
  auto init = ctr::nmf_factorize(g, 3, 0, 1e-5, 13);  // grab W0, H0
  const int iters = 60;
  auto mine = ctr::nmf_factorize(g, 3, iters, 0.0, 13);
  auto ref = oracle::dense_nmf(x, init.W, init.H, iters);
  EXPECT_LE(mine.objective_trace.back(), mine.objective_trace.front());
  EXPECT_NEAR(mine.objective_trace.back(), ref.objective, 1e-8);
}

TEST(Nmf, ObjectiveTraceMonotone) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x = oracle::random_binary(40, 30, 0.25, rng);
    auto g = oracle::graph_from_dense(x);
    auto f = ctr::nmf_factorize(g, 4, 120, 0.0, 100 + trial);
    for (std::size_t i = 1; i < f.objective_trace.size(); ++i)
      EXPECT_LE(f.objective_trace[i],
                f.objective_trace[i - 1] * (1.0 + 1e-10) + 1e-300)
          << "trial " << trial << " iter " << i;
    EXPECT_GE(f.W.minCoeff(), 0.0);
    EXPECT_GE(f.H.minCoeff(), 0.0);
  }
}

TEST(Nmf, ToleranceStopsEarlyAndFlags) {
  std::mt19937 rng(6);
  Eigen::MatrixXd x = oracle::random_binary(25, 18, 0.3, rng);
  auto g = oracle::graph_from_dense(x);
  auto f = ctr::nmf_factorize(g, 2, 500, 1e-5, 21);
  EXPECT_TRUE(f.converged);
  EXPECT_LT(f.iterations, 500u);
  auto f2 = ctr::nmf_factorize(g, 2, 3, 0.0, 21);
  EXPECT_FALSE(f2.converged);
  EXPECT_EQ(f2.iterations, 3u);
}

TEST(Nmf, DeterministicAcrossWorkerCounts) {
  std::mt19937 rng(7);
  Eigen::MatrixXd x = oracle::random_binary(50, 35, 0.2, rng);
  auto g = oracle::graph_from_dense(x);
  auto f1 = ctr::nmf_factorize(g, 3, 40, 0.0, 33);
  int saved = ctr::par::workers();
  ctr::par::set_workers(6);
  auto f2 = ctr::nmf_factorize(g, 3, 40, 0.0, 33);
  ctr::par::set_workers(saved);
  EXPECT_EQ(f1.W, f2.W);
  EXPECT_EQ(f1.H, f2.H);
}

TEST(Nmf, RejectsZeroRank) {
  auto g = oracle::graph_from_dense(Eigen::MatrixXd::Ones(3, 3));
  EXPECT_THROW(ctr::nmf_factorize(g, 0), ctr::DimensionError);
}

TEST(Nmf, SparseExportRoundtripsAboveThreshold) {
  std::mt19937 rng(8);
  Eigen::MatrixXd x = oracle::random_binary(12, 9, 0.4, rng);
  auto g = oracle::graph_from_dense(x);
  auto f = ctr::nmf_factorize(g, 2, 80, 0.0, 44);
  std::stringstream ws;
  ctr::save_sparse_matrix(ws, f.W, true);
  Eigen::MatrixXd w2 = ctr::load_sparse_matrix(ws);
  ASSERT_EQ(w2.rows(), f.W.rows());
  ASSERT_EQ(w2.cols(), f.W.cols());
  for (Eigen::Index c = 0; c < f.W.cols(); ++c) {
    double thr = ctr::nmf_component_threshold(f.W, c, true);
    for (Eigen::Index r = 0; r < f.W.rows(); ++r) {
      if (f.W(r, c) > thr)
        EXPECT_EQ(w2(r, c), f.W(r, c));
      else
        EXPECT_EQ(w2(r, c), 0.0);
    }
  }
  EXPECT_EQ(ctr::nmf_nnz(f.W, true),
            static_cast<std::size_t>((w2.array() != 0.0).count()));
}

}  // namespace
