#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctr/ingest.hpp"
#include "ctr/parallel.hpp"
#include "ctr/rng.hpp"

namespace ctr {

/// Ground truth co-cluster layout behind a synthetic log.
struct PlantedStructure {
  std::unordered_map<std::string, int> true_user_cluster;
  std::unordered_map<std::string, int> true_url_cluster;
  std::vector<std::vector<double>> true_block_density;  // k_user x k_url
  std::vector<std::vector<double>> true_block_ctr;      // k_user x k_url
};

struct SynthParams {
  std::size_t n_users = 0;
  std::size_t n_urls = 0;
  std::size_t k_user = 1;
  std::size_t k_url = 1;
  double density_in = 0.0;
  double density_out = 0.0;
  std::vector<std::vector<double>> ctr_by_block;  // k_user x k_url
  std::size_t n_impressions = 0;
  std::uint64_t seed = 0;
  // plumbing knobs; the last day is the test day
  std::size_t n_days = 8;
  std::size_t n_banners = 5;
};

namespace synth_step {
inline constexpr std::uint64_t kAssignUser = 1;
inline constexpr std::uint64_t kAssignUrl = 2;
inline constexpr std::uint64_t kEdgeRow = 3;
inline constexpr std::uint64_t kImpression = 4;
}  // namespace synth_step

namespace detail {

inline std::vector<int> assign_clusters(std::size_t n, std::size_t k,
                                        std::uint64_t seed, std::uint64_t step) {
  for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
    std::vector<int> z(n);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(stream_key(seed, step, i, attempt));
      z[i] = static_cast<int>(rng.uniform_int(k));
      ++sizes[z[i]];
    }
    bool ok = true;
    for (std::size_t c = 0; c < k; ++c) ok = ok && sizes[c] > 0;
    if (ok) return z;
  }
  throw NumericError("generate_synthetic: could not produce non-empty clusters");
}

}  // namespace detail

/// Geometric CTR ladder over blocks, spread with a fixed coprime permutation
/// so the rate is not an additive function of the two cluster indices.
inline std::vector<std::vector<double>> ctr_ramp(std::size_t k_user, std::size_t k_url,
                                                 double ctr_min, double ctr_max) {
  const std::size_t nb = k_user * k_url;
  std::size_t a = 7;
  while (std::gcd(a, nb) != 1) ++a;
  std::vector<std::vector<double>> ctr(k_user, std::vector<double>(k_url, ctr_min));
  for (std::size_t i = 0; i < k_user; ++i)
    for (std::size_t j = 0; j < k_url; ++j) {
      std::size_t idx = (a * (i * k_url + j) + 3) % nb;
      double frac = nb > 1 ? static_cast<double>(idx) / (nb - 1) : 0.0;
      ctr[i][j] = ctr_min * std::pow(ctr_max / ctr_min, frac);
    }
  return ctr;
}

/// Plant a block structure and emit a transaction log over it: one view per
/// realized edge (train days), then uniform impressions over edges with
/// Bernoulli clicks at the block CTR. Byte-identical output for a fixed seed
/// regardless of worker count.
inline std::pair<std::vector<Transaction>, PlantedStructure> generate_synthetic(
    const SynthParams& p) {
  if (p.n_users == 0 || p.n_urls == 0)
    throw ValidationError("generate_synthetic: empty user or url set");
  if (p.k_user == 0 || p.k_url == 0 || p.k_user > p.n_users || p.k_url > p.n_urls)
    throw ValidationError("generate_synthetic: cluster count out of range");
  if (p.density_in < 0 || p.density_in > 1 || p.density_out < 0 || p.density_out > 1)
    throw ValidationError("generate_synthetic: densities must lie in [0,1]");
  if (p.ctr_by_block.size() != p.k_user)
    throw ValidationError("generate_synthetic: ctr_by_block has wrong shape");
  for (const auto& row : p.ctr_by_block) {
    if (row.size() != p.k_url)
      throw ValidationError("generate_synthetic: ctr_by_block has wrong shape");
    for (double c : row)
      if (c < 0 || c > 1)
        throw ValidationError("generate_synthetic: CTR must lie in [0,1]");
  }
  if (p.n_days < 2) throw ValidationError("generate_synthetic: need >= 2 days");
  if (p.n_banners < 1) throw ValidationError("generate_synthetic: need >= 1 banner");

  std::vector<int> zu =
      detail::assign_clusters(p.n_users, p.k_user, p.seed, synth_step::kAssignUser);
  std::vector<int> zl =
      detail::assign_clusters(p.n_urls, p.k_url, p.seed, synth_step::kAssignUrl);

  std::vector<std::string> user_ids(p.n_users), url_ids(p.n_urls),
      banner_ids(p.n_banners);
  for (std::size_t i = 0; i < p.n_users; ++i) user_ids[i] = "u" + std::to_string(i);
  for (std::size_t j = 0; j < p.n_urls; ++j)
    url_ids[j] = "http://s" + std::to_string(j) + ".example/";
  for (std::size_t b = 0; b < p.n_banners; ++b) banner_ids[b] = "b" + std::to_string(b);

  const std::size_t train_days = p.n_days - 1;

  // Per-row edge draws plus the per-edge view transaction, row-owned so the
  // result cannot depend on scheduling.
  struct RowOut {
    std::vector<std::uint32_t> urls;
    std::vector<Transaction> views;
  };
  std::vector<RowOut> rows(p.n_users);
  par::for_blocks(p.n_users, 256, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng(stream_key(p.seed, synth_step::kEdgeRow, i));
      RowOut& r = rows[i];
      for (std::size_t j = 0; j < p.n_urls; ++j) {
        double d = zu[i] == zl[j] ? p.density_in : p.density_out;
        if (rng.bernoulli(d)) r.urls.push_back(static_cast<std::uint32_t>(j));
      }
      r.views.reserve(r.urls.size());
      for (std::uint32_t j : r.urls) {
        std::int64_t day = static_cast<std::int64_t>(rng.uniform_int(train_days));
        std::int64_t off = static_cast<std::int64_t>(rng.uniform_int(kMsPerDay - 1));
        std::size_t b = rng.uniform_int(p.n_banners);
        r.views.push_back(
            {day * kMsPerDay + off, user_ids[i], banner_ids[b], url_ids[j], Event::view});
      }
    }
  });

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<Transaction> txns;
  for (std::size_t i = 0; i < p.n_users; ++i) {
    for (std::uint32_t j : rows[i].urls)
      edges.emplace_back(static_cast<std::uint32_t>(i), j);
    for (auto& t : rows[i].views) txns.push_back(std::move(t));
  }

  if (p.n_impressions > 0 && edges.empty())
    throw ValidationError("generate_synthetic: no edges to place impressions on");

  for (std::size_t n = 0; n < p.n_impressions; ++n) {
    Rng rng(stream_key(p.seed, synth_step::kImpression, n));
    auto [ui, uj] = edges[rng.uniform_int(edges.size())];
    std::int64_t day = static_cast<std::int64_t>(rng.uniform_int(p.n_days));
    std::int64_t off = static_cast<std::int64_t>(rng.uniform_int(kMsPerDay - 1));
    std::size_t b = rng.uniform_int(p.n_banners);
    std::int64_t ts = day * kMsPerDay + off;
    txns.push_back({ts, user_ids[ui], banner_ids[b], url_ids[uj], Event::view});
    if (rng.bernoulli(p.ctr_by_block[zu[ui]][zl[uj]]))
      txns.push_back({ts + 1, user_ids[ui], banner_ids[b], url_ids[uj], Event::click});
  }

  PlantedStructure truth;
  truth.true_block_density.assign(p.k_user, std::vector<double>(p.k_url, p.density_out));
  for (std::size_t a = 0; a < p.k_user; ++a)
    for (std::size_t b = 0; b < p.k_url; ++b)
      if (a == b) truth.true_block_density[a][b] = p.density_in;
  truth.true_block_ctr = p.ctr_by_block;
  for (std::size_t i = 0; i < p.n_users; ++i) truth.true_user_cluster[user_ids[i]] = zu[i];
  for (std::size_t j = 0; j < p.n_urls; ++j) truth.true_url_cluster[url_ids[j]] = zl[j];
  return {std::move(txns), std::move(truth)};
}

}  // namespace ctr
