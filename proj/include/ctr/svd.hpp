#pragma once

#include <Eigen/Dense>
#include <algorithm>
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

struct SvdFactors {
  Eigen::MatrixXd U;  // M x K
  Eigen::VectorXd S;  // K, non-increasing
  Eigen::MatrixXd V;  // N x K
  std::size_t K = 0;
  double achieved_tol = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

namespace detail {

// Y = X * Omega, rows owned per user block so worker count cannot matter.
inline void adjacency_times(const BipartiteGraph& g, const Eigen::MatrixXd& omega,
                            Eigen::MatrixXd& y) {
  y.setZero(static_cast<Eigen::Index>(g.n_users), omega.cols());
  par::for_blocks(g.n_users, 1024, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e)
        y.row(static_cast<Eigen::Index>(i)) += omega.row(g.row_cols[e]);
  });
}

// Z = X^T * Q via the column-major view.
inline void adjacency_transpose_times(const BipartiteGraph& g, const Eigen::MatrixXd& q,
                                      Eigen::MatrixXd& z) {
  z.setZero(static_cast<Eigen::Index>(g.n_urls), q.cols());
  par::for_blocks(g.n_urls, 1024, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j)
      for (std::size_t e = g.col_ptr[j]; e < g.col_ptr[j + 1]; ++e)
        z.row(static_cast<Eigen::Index>(j)) += q.row(g.col_rows[e]);
  });
}

inline Eigen::MatrixXd thin_q(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
}

}  // namespace detail

namespace svd_step {
inline constexpr std::uint64_t kInit = 1;
}

/// Top-K singular triplets of the binary adjacency by randomized subspace
/// iteration (oversampling 10, at least 4 power steps). Sign convention:
/// the largest-magnitude entry of each U column is made positive.
inline SvdFactors truncated_svd(const BipartiteGraph& g, std::size_t K,
                                std::size_t max_iter = 100, double tol = 1e-10,
                                std::uint64_t seed = 0) {
  const std::size_t m = g.n_users, n = g.n_urls;
  if (K < 1 || K > std::min(m, n))
    throw DimensionError("truncated_svd: K must lie in [1, min(M,N)]");
  const std::size_t r = std::min(K + 10, std::min(m, n));
  const auto ri = static_cast<Eigen::Index>(r);

  Eigen::MatrixXd omega(n, ri);
  for (std::size_t j = 0; j < n; ++j) {
    Rng rng(stream_key(seed, svd_step::kInit, j));
    for (Eigen::Index c = 0; c < ri; ++c)
      omega(static_cast<Eigen::Index>(j), c) = rng.normal();
  }

  Eigen::MatrixXd y, z;
  detail::adjacency_times(g, omega, y);
  Eigen::MatrixXd q = detail::thin_q(y);

  SvdFactors out;
  out.K = K;
  Eigen::VectorXd sigma_prev = Eigen::VectorXd::Zero(ri);
  Eigen::MatrixXd b_qt, us, vs;
  Eigen::VectorXd sigma;
  double resid = std::numeric_limits<double>::infinity();
  const std::size_t min_iter = 4;

  std::size_t it = 0;
  for (; it < std::max(max_iter, min_iter); ++it) {
    detail::adjacency_transpose_times(g, q, z);  // n x r
    Eigen::MatrixXd qz = detail::thin_q(z);
    detail::adjacency_times(g, qz, y);
    q = detail::thin_q(y);

    // small decomposition of B = Q^T X through the QR of B^T = Z with Z = X^T Q
    detail::adjacency_transpose_times(g, q, z);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    Eigen::MatrixXd q2 = qr.householderQ() * Eigen::MatrixXd::Identity(z.rows(), ri);
    Eigen::MatrixXd r2 = qr.matrixQR().topRows(ri).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> small(r2.transpose(),
                                            Eigen::ComputeThinU | Eigen::ComputeThinV);
    sigma = small.singularValues();
    us = small.matrixU();
    vs = q2 * small.matrixV();

    double scale = std::max(sigma(0), 1e-300);
    resid = (sigma.head(static_cast<Eigen::Index>(K)) -
             sigma_prev.head(static_cast<Eigen::Index>(K)))
                .cwiseAbs()
                .maxCoeff() /
            scale;
    sigma_prev = sigma;
    if (it + 1 >= min_iter && resid < tol) {
      out.converged = true;
      ++it;
      break;
    }
  }

  out.iterations = it;
  out.achieved_tol = resid;
  const auto ki = static_cast<Eigen::Index>(K);
  out.U = q * us.leftCols(ki);
  out.S = sigma.head(ki);
  out.V = vs.leftCols(ki);

  for (Eigen::Index c = 0; c < ki; ++c) {
    Eigen::Index at = 0;
    out.U.col(c).cwiseAbs().maxCoeff(&at);
    if (out.U(at, c) < 0) {
      out.U.col(c) = -out.U.col(c);
      out.V.col(c) = -out.V.col(c);
    }
  }
  return out;
}

/// int64 rows, int64 cols, then row-major doubles.
inline void save_matrix_bin(std::ostream& os, const Eigen::MatrixXd& m) {
  std::int64_t shape[2] = {m.rows(), m.cols()};
  os.write(reinterpret_cast<const char*>(shape), sizeof shape);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = m(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  if (!os) throw IoError("save_matrix_bin: write failed");
}

inline Eigen::MatrixXd load_matrix_bin(std::istream& is) {
  std::int64_t shape[2] = {0, 0};
  is.read(reinterpret_cast<char*>(shape), sizeof shape);
  if (!is || shape[0] < 0 || shape[1] < 0)
    throw FormatError("load_matrix_bin: bad shape header");
  Eigen::MatrixXd m(shape[0], shape[1]);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = 0;
      is.read(reinterpret_cast<char*>(&v), sizeof v);
      if (!is) throw FormatError("load_matrix_bin: truncated data");
      m(i, j) = v;
    }
  return m;
}

inline void save_vector_text(std::ostream& os, const Eigen::VectorXd& v) {
  char buf[64];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v(i));
    os << buf;
  }
  if (!os) throw IoError("save_vector_text: write failed");
}

inline Eigen::VectorXd load_vector_text(std::istream& is) {
  std::vector<double> vals;
  double x = 0;
  while (is >> x) vals.push_back(x);
  if (!is.eof() && is.fail()) throw FormatError("load_vector_text: bad number");
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<Eigen::Index>(i)) = vals[i];
  return v;
}

}  // namespace ctr
