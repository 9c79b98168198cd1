#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <vector>

#include "ctr/errors.hpp"
#include "ctr/graph.hpp"
#include "ctr/parallel.hpp"
#include "ctr/rng.hpp"

namespace ctr {

struct NmfFactors {
  Eigen::MatrixXd W;  // M x K
  Eigen::MatrixXd H;  // K x N
  std::size_t K = 0;
  std::vector<double> objective_trace;  // 0.5 * ||X - WH||_F^2 per iteration
  double residual_fro = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

namespace nmf_step {
inline constexpr std::uint64_t kInitW = 1;
inline constexpr std::uint64_t kInitH = 2;
}  // namespace nmf_step

/// Exact 0.5 * ||X - WH||_F^2 without densifying X:
/// nnz - 2 * sum_edges W_i . H_j + <W^T W, H H^T>.
inline double nmf_objective(const BipartiteGraph& g, const Eigen::MatrixXd& w,
                            const Eigen::MatrixXd& h) {
  if (w.rows() != static_cast<Eigen::Index>(g.n_users) ||
      h.cols() != static_cast<Eigen::Index>(g.n_urls) || w.cols() != h.rows())
    throw DimensionError("nmf_objective: factor shapes do not conform");
  double cross = par::sum_blocks(g.n_users, 4096, [&](std::size_t lo, std::size_t hi) {
    double acc = 0;
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e)
        acc += w.row(static_cast<Eigen::Index>(i)).dot(h.col(g.row_cols[e]));
    return acc;
  });
  double gram = (w.transpose() * w).cwiseProduct(h * h.transpose()).sum();
  return 0.5 * (static_cast<double>(g.n_edges) - 2.0 * cross + gram);
}

/// Least-squares multiplicative updates. H first, then W, each full iteration;
/// denominators padded with eps so the quotient never divides by zero.
inline NmfFactors nmf_factorize(const BipartiteGraph& g, std::size_t K,
                                std::size_t max_iter = 500, double tol = 1e-5,
                                std::uint64_t seed = 0) {
  if (K < 1) throw DimensionError("nmf_factorize: K must be >= 1");
  const double eps = 1e-12;
  const auto m = static_cast<Eigen::Index>(g.n_users);
  const auto n = static_cast<Eigen::Index>(g.n_urls);
  const auto k = static_cast<Eigen::Index>(K);

  double mean = static_cast<double>(g.n_edges) /
                (static_cast<double>(g.n_users) * static_cast<double>(g.n_urls));
  double scale = std::sqrt(std::max(mean, 1e-12) / static_cast<double>(K));

  NmfFactors out;
  out.K = K;
  out.W.resize(m, k);
  out.H.resize(k, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    Rng rng(stream_key(seed, nmf_step::kInitW, static_cast<std::uint64_t>(i)));
    for (Eigen::Index c = 0; c < k; ++c) out.W(i, c) = rng.uniform_pos() * scale;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Rng rng(stream_key(seed, nmf_step::kInitH, static_cast<std::uint64_t>(j)));
    for (Eigen::Index c = 0; c < k; ++c) out.H(c, j) = rng.uniform_pos() * scale;
  }

  double obj = nmf_objective(g, out.W, out.H);
  out.objective_trace.push_back(obj);

  Eigen::MatrixXd wtx(k, n), xht(m, k);
  for (std::size_t it = 0; it < max_iter; ++it) {
    // numerator W^T X, one owned column per url
    par::for_blocks(g.n_urls, 2048, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t j = lo; j < hi; ++j) {
        auto jj = static_cast<Eigen::Index>(j);
        wtx.col(jj).setZero();
        for (std::size_t e = g.col_ptr[j]; e < g.col_ptr[j + 1]; ++e)
          wtx.col(jj) += out.W.row(g.col_rows[e]).transpose();
      }
    });
    Eigen::MatrixXd wtw = out.W.transpose() * out.W;
    out.H = out.H.cwiseProduct(wtx).cwiseQuotient(
        ((wtw * out.H).array() + eps).matrix());

    par::for_blocks(g.n_users, 2048, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        auto ii = static_cast<Eigen::Index>(i);
        xht.row(ii).setZero();
        for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e)
          xht.row(ii) += out.H.col(g.row_cols[e]).transpose();
      }
    });
    Eigen::MatrixXd hht = out.H * out.H.transpose();
    out.W = out.W.cwiseProduct(xht).cwiseQuotient(
        ((out.W * hht).array() + eps).matrix());

    if (!out.W.allFinite() || !out.H.allFinite())
      throw NumericError("nmf_factorize: non-finite factor entry at iteration " +
                         std::to_string(it));

    double next = nmf_objective(g, out.W, out.H);
    out.objective_trace.push_back(next);
    out.iterations = it + 1;
    double rel = std::abs(obj - next) / std::max(obj, 1e-300);
    obj = next;
    if (rel < tol) {
      out.converged = true;
      break;
    }
  }
  out.residual_fro = std::sqrt(std::max(0.0, 2.0 * obj));
  return out;
}

/// Loading entry counts as non-zero iff it exceeds 1e-8 of its component's
/// peak. For W components run down columns; pass by_col=false for H where
/// they run along rows.
inline double nmf_component_threshold(const Eigen::MatrixXd& mat, Eigen::Index comp,
                                      bool by_col) {
  double peak = by_col ? mat.col(comp).maxCoeff() : mat.row(comp).maxCoeff();
  return 1e-8 * peak;
}

inline std::size_t nmf_nnz(const Eigen::MatrixXd& mat, bool by_col) {
  std::size_t nnz = 0;
  Eigen::Index comps = by_col ? mat.cols() : mat.rows();
  for (Eigen::Index c = 0; c < comps; ++c) {
    double thr = nmf_component_threshold(mat, c, by_col);
    Eigen::Index len = by_col ? mat.rows() : mat.cols();
    for (Eigen::Index t = 0; t < len; ++t)
      if ((by_col ? mat(t, c) : mat(c, t)) > thr) ++nnz;
  }
  return nnz;
}

/// "rows cols" header then "row col value" triplets above the component
/// threshold.
inline void save_sparse_matrix(std::ostream& os, const Eigen::MatrixXd& mat,
                               bool by_col) {
  os << mat.rows() << ' ' << mat.cols() << '\n';
  char buf[96];
  Eigen::Index comps = by_col ? mat.cols() : mat.rows();
  for (Eigen::Index c = 0; c < comps; ++c) {
    double thr = nmf_component_threshold(mat, c, by_col);
    Eigen::Index len = by_col ? mat.rows() : mat.cols();
    for (Eigen::Index t = 0; t < len; ++t) {
      Eigen::Index r = by_col ? t : c;
      Eigen::Index cc = by_col ? c : t;
      if (mat(r, cc) > thr) {
        std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(r),
                      static_cast<long long>(cc), mat(r, cc));
        os << buf;
      }
    }
  }
  if (!os) throw IoError("save_sparse_matrix: write failed");
}

inline Eigen::MatrixXd load_sparse_matrix(std::istream& is) {
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw FormatError("load_sparse_matrix: bad header");
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  double v = 0;
  while (is >> r >> c >> v) {
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw FormatError("load_sparse_matrix: index out of range");
    mat(r, c) = v;
  }
  if (!is.eof() && is.fail() && !is.bad()) {
    is.clear();
    std::string tok;
    is >> tok;
    throw FormatError("load_sparse_matrix: bad triplet near '" + tok + "'");
  }
  return mat;
}

}  // namespace ctr
