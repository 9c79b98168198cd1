#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctr/errors.hpp"
#include "ctr/ingest.hpp"

namespace ctr {

/// Binary user x URL incidence with both row-major and column-major access.
/// Immutable once built; share freely across threads.
struct BipartiteGraph {
  std::size_t n_users = 0;  // M
  std::size_t n_urls = 0;   // N
  std::size_t n_edges = 0;

  // CSR over users and CSC over urls; both hold the same edge set
  std::vector<std::size_t> row_ptr;           // M+1
  std::vector<std::uint32_t> row_cols;        // url index per edge
  std::vector<std::size_t> col_ptr;           // N+1
  std::vector<std::uint32_t> col_rows;        // user index per edge

  std::vector<std::string> user_ids;          // row index -> id
  std::vector<std::string> url_ids;           // col index -> id
  std::unordered_map<std::string, std::uint32_t> user_index;
  std::unordered_map<std::string, std::uint32_t> url_index;

  std::size_t user_degree(std::size_t i) const { return row_ptr[i + 1] - row_ptr[i]; }
  std::size_t url_degree(std::size_t j) const { return col_ptr[j + 1] - col_ptr[j]; }

  bool has_edge(std::size_t i, std::size_t j) const {
    auto b = row_cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    auto e = row_cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    return std::binary_search(b, e, static_cast<std::uint32_t>(j));
  }
};

namespace detail {

/// Fill CSR/CSC from a deduplicated edge list sorted by (user, url).
inline void index_edges(BipartiteGraph& g,
                        const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  g.n_edges = edges.size();
  g.row_ptr.assign(g.n_users + 1, 0);
  g.col_ptr.assign(g.n_urls + 1, 0);
  for (auto [i, j] : edges) {
    ++g.row_ptr[i + 1];
    ++g.col_ptr[j + 1];
  }
  for (std::size_t i = 0; i < g.n_users; ++i) g.row_ptr[i + 1] += g.row_ptr[i];
  for (std::size_t j = 0; j < g.n_urls; ++j) g.col_ptr[j + 1] += g.col_ptr[j];
  g.row_cols.resize(edges.size());
  g.col_rows.resize(edges.size());
  std::vector<std::size_t> rfill(g.row_ptr.begin(), g.row_ptr.end() - 1);
  std::vector<std::size_t> cfill(g.col_ptr.begin(), g.col_ptr.end() - 1);
  for (auto [i, j] : edges) {
    g.row_cols[rfill[i]++] = j;
    g.col_rows[cfill[j]++] = i;
  }
}

}  // namespace detail

/// Collapse view transactions into the unweighted incidence graph. Click
/// events carry no edge information of their own and are ignored here.
inline BipartiteGraph build_bipartite(const std::vector<Transaction>& train) {
  BipartiteGraph g;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& t : train) {
    if (t.event != Event::view) continue;
    auto [uit, unew] = g.user_index.try_emplace(
        t.user_id, static_cast<std::uint32_t>(g.user_ids.size()));
    if (unew) g.user_ids.push_back(t.user_id);
    auto [lit, lnew] =
        g.url_index.try_emplace(t.url, static_cast<std::uint32_t>(g.url_ids.size()));
    if (lnew) g.url_ids.push_back(t.url);
    edges.emplace_back(uit->second, lit->second);
  }
  if (edges.empty()) throw ValidationError("build_bipartite: no view transactions");
  g.n_users = g.user_ids.size();
  g.n_urls = g.url_ids.size();
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  detail::index_edges(g, edges);
  return g;
}

/// Keep the top_users highest-degree users (ties by lower original index,
/// i.e. first appearance), then URLs seen by at least min_unique_users_per_url
/// of the retained users. Indices are compacted preserving original order.
inline BipartiteGraph filter_graph(const BipartiteGraph& g, std::size_t top_users,
                                   std::size_t min_unique_users_per_url) {
  if (top_users < 1 || min_unique_users_per_url < 1)
    throw ValidationError("filter_graph: thresholds must be >= 1");

  std::vector<std::uint32_t> order(g.n_users);
  for (std::uint32_t i = 0; i < g.n_users; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return g.user_degree(a) > g.user_degree(b);
  });
  if (top_users < order.size()) order.resize(top_users);
  std::sort(order.begin(), order.end());

  std::vector<std::uint32_t> new_user(g.n_users, UINT32_MAX);
  for (std::uint32_t k = 0; k < order.size(); ++k) new_user[order[k]] = k;

  std::vector<std::size_t> url_count(g.n_urls, 0);
  for (std::uint32_t i : order)
    for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e)
      ++url_count[g.row_cols[e]];

  std::vector<std::uint32_t> new_url(g.n_urls, UINT32_MAX);
  std::uint32_t nj = 0;
  for (std::size_t j = 0; j < g.n_urls; ++j)
    if (url_count[j] >= min_unique_users_per_url) new_url[j] = nj++;

  BipartiteGraph out;
  out.n_users = order.size();
  out.n_urls = nj;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i : order)
    for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e) {
      std::uint32_t j = g.row_cols[e];
      if (new_url[j] != UINT32_MAX) edges.emplace_back(new_user[i], new_url[j]);
    }
  if (edges.empty() || out.n_urls == 0)
    throw ValidationError("filter_graph: filter removed every edge");
  std::sort(edges.begin(), edges.end());

  out.user_ids.resize(out.n_users);
  for (std::uint32_t i : order) {
    out.user_ids[new_user[i]] = g.user_ids[i];
    out.user_index.emplace(g.user_ids[i], new_user[i]);
  }
  out.url_ids.resize(out.n_urls);
  for (std::size_t j = 0; j < g.n_urls; ++j)
    if (new_url[j] != UINT32_MAX) {
      out.url_ids[new_url[j]] = g.url_ids[j];
      out.url_index.emplace(g.url_ids[j], new_url[j]);
    }
  detail::index_edges(out, edges);
  return out;
}

/// "M N E" header then one "user_idx url_idx" line per edge.
inline void save_graph(std::ostream& os, const BipartiteGraph& g) {
  os << g.n_users << ' ' << g.n_urls << ' ' << g.n_edges << '\n';
  for (std::size_t i = 0; i < g.n_users; ++i)
    for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e)
      os << i << ' ' << g.row_cols[e] << '\n';
  if (!os) throw IoError("save_graph: write failed");
}

inline void save_dict(std::ostream& os, const std::vector<std::string>& ids) {
  for (std::size_t i = 0; i < ids.size(); ++i) os << i << '\t' << ids[i] << '\n';
  if (!os) throw IoError("save_dict: write failed");
}

inline BipartiteGraph load_graph(std::istream& is) {
  BipartiteGraph g;
  std::size_t e_count = 0;
  if (!(is >> g.n_users >> g.n_urls >> e_count))
    throw FormatError("load_graph: bad header");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(e_count);
  for (std::size_t k = 0; k < e_count; ++k) {
    std::uint64_t i = 0, j = 0;
    if (!(is >> i >> j)) throw FormatError("load_graph: truncated edge list");
    if (i >= g.n_users || j >= g.n_urls)
      throw FormatError("load_graph: edge index out of range");
    edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw FormatError("load_graph: duplicate edge");
  detail::index_edges(g, edges);
  return g;
}

inline std::vector<std::string> load_dict(std::istream& is, std::size_t expect) {
  std::vector<std::string> ids(expect);
  std::vector<bool> seen(expect, false);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("load_dict: missing tab");
    std::size_t idx = 0;
    try {
      idx = std::stoull(line.substr(0, tab));
    } catch (const std::exception&) {
      throw FormatError("load_dict: bad index");
    }
    if (idx >= expect || seen[idx]) throw FormatError("load_dict: bad or repeated index");
    seen[idx] = true;
    ids[idx] = line.substr(tab + 1);
  }
  for (bool s : seen)
    if (!s) throw FormatError("load_dict: missing entries");
  return ids;
}

/// Reattach id maps after load_graph + load_dict.
inline void attach_dicts(BipartiteGraph& g, std::vector<std::string> users,
                         std::vector<std::string> urls) {
  if (users.size() != g.n_users || urls.size() != g.n_urls)
    throw DimensionError("attach_dicts: dictionary size mismatch");
  g.user_ids = std::move(users);
  g.url_ids = std::move(urls);
  g.user_index.clear();
  g.url_index.clear();
  for (std::uint32_t i = 0; i < g.n_users; ++i) g.user_index.emplace(g.user_ids[i], i);
  for (std::uint32_t j = 0; j < g.n_urls; ++j) g.url_index.emplace(g.url_ids[j], j);
}

}  // namespace ctr
