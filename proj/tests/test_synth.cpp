#include "ctr/synth.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

namespace {

ctr::SynthParams base_params() {
  ctr::SynthParams p;
  p.n_users = 100;
  p.n_urls = 40;
  p.k_user = 2;
  p.k_url = 2;
  p.density_in = 1.0;
  p.density_out = 0.0;
  p.ctr_by_block = {{0.1, 0.2}, {0.3, 0.4}};
  p.n_impressions = 500;
  p.seed = 99;
  return p;
}

std::string render(const std::vector<ctr::Transaction>& txns) {
  std::ostringstream os;
  for (const auto& t : txns)
    os << t.timestamp_ms << '\t' << t.user_id << '\t' << t.banner_id << '\t' << t.url
       << '\t' << (t.event == ctr::Event::click ? "click" : "view") << '\n';
  return os.str();
}

TEST(Synth, DegenerateDensitiesGiveExactBlockDiagonal) {
  auto p = base_params();
  p.n_impressions = 0;
  auto [txns, truth] = ctr::generate_synthetic(p);
  // with density_in=1, density_out=0 every view joins same-cluster pairs only,
  // and every same-cluster pair appears exactly once
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& t : txns) {
    ASSERT_EQ(t.event, ctr::Event::view);
    EXPECT_EQ(truth.true_user_cluster.at(t.user_id), truth.true_url_cluster.at(t.url));
    EXPECT_TRUE(seen.emplace(t.user_id, t.url).second);
  }
  std::size_t expect = 0;
  std::size_t uc0 = 0, lc0 = 0;
  for (auto& [_, c] : truth.true_user_cluster) uc0 += c == 0;
  for (auto& [_, c] : truth.true_url_cluster) lc0 += c == 0;
  expect = uc0 * lc0 + (p.n_users - uc0) * (p.n_urls - lc0);
  EXPECT_EQ(txns.size(), expect);
}

TEST(Synth, ZeroCtrMeansZeroClicks) {
  auto p = base_params();
  p.ctr_by_block = {{0.0, 0.0}, {0.0, 0.0}};
  auto [txns, truth] = ctr::generate_synthetic(p);
  for (const auto& t : txns) EXPECT_EQ(t.event, ctr::Event::view);
}

TEST(Synth, DeterministicAcrossRunsAndWorkers) {
  auto p = base_params();
  auto [t1, s1] = ctr::generate_synthetic(p);
  auto [t2, s2] = ctr::generate_synthetic(p);
  EXPECT_EQ(render(t1), render(t2));
  int saved = ctr::par::workers();
  ctr::par::set_workers(4);
  auto [t3, s3] = ctr::generate_synthetic(p);
  ctr::par::set_workers(saved);
  EXPECT_EQ(render(t1), render(t3));
  EXPECT_EQ(s1.true_user_cluster, s3.true_user_cluster);
  EXPECT_EQ(s1.true_url_cluster, s3.true_url_cluster);
}

TEST(Synth, SeedChangesOutput) {
  auto p = base_params();
  auto [t1, s1] = ctr::generate_synthetic(p);
  p.seed = 100;
  auto [t2, s2] = ctr::generate_synthetic(p);
  EXPECT_NE(render(t1), render(t2));
}

TEST(Synth, EveryClusterPopulated) {
  auto p = base_params();
  p.n_users = 5;
  p.n_urls = 5;
  p.k_user = 4;
  p.k_url = 4;
  p.ctr_by_block.assign(4, std::vector<double>(4, 0.01));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    p.seed = seed;
    auto [txns, truth] = ctr::generate_synthetic(p);
    std::set<int> uc, lc;
    for (auto& [_, c] : truth.true_user_cluster) uc.insert(c);
    for (auto& [_, c] : truth.true_url_cluster) lc.insert(c);
    EXPECT_EQ(uc.size(), 4u) << "seed " << seed;
    EXPECT_EQ(lc.size(), 4u) << "seed " << seed;
  }
}

TEST(Synth, ImpressionsRideExistingEdges) {
  auto p = base_params();
  p.density_in = 0.3;
  p.density_out = 0.05;
  auto [txns, truth] = ctr::generate_synthetic(p);
  // first pass: collect the planted edge views (impressions duplicate them)
  std::set<std::pair<std::string, std::string>> edges;
  std::size_t last_day = 0;
  for (const auto& t : txns) {
    edges.emplace(t.user_id, t.url);
    last_day = std::max<std::size_t>(last_day, ctr::day_of(t));
  }
  for (const auto& t : txns) EXPECT_TRUE(edges.count({t.user_id, t.url}));
  EXPECT_EQ(last_day, p.n_days - 1);  // impressions reach the held-out day
  // clicks follow a view at the same spot
  for (std::size_t i = 0; i < txns.size(); ++i)
    if (txns[i].event == ctr::Event::click) {
      ASSERT_GT(i, 0u);
      EXPECT_EQ(txns[i - 1].event, ctr::Event::view);
      EXPECT_EQ(txns[i - 1].user_id, txns[i].user_id);
      EXPECT_EQ(txns[i - 1].url, txns[i].url);
      EXPECT_EQ(ctr::day_of(txns[i - 1]), ctr::day_of(txns[i]));
    }
}

TEST(Synth, ValidatesParameters) {
  auto p = base_params();
  p.k_user = 101;
  EXPECT_THROW(ctr::generate_synthetic(p), ctr::ValidationError);
  p = base_params();
  p.density_in = 1.5;
  EXPECT_THROW(ctr::generate_synthetic(p), ctr::ValidationError);
  p = base_params();
  p.ctr_by_block = {{0.1}};
  EXPECT_THROW(ctr::generate_synthetic(p), ctr::ValidationError);
  p = base_params();
  p.ctr_by_block[1][1] = 2.0;
  EXPECT_THROW(ctr::generate_synthetic(p), ctr::ValidationError);
}

TEST(Synth, CtrRampCoversRangeOnce) {
  auto ctr_mat = ctr::ctr_ramp(4, 4, 0.002, 0.05);
  std::set<double> vals;
  double lo = 1, hi = 0;
  for (auto& row : ctr_mat)
    for (double c : row) {
      vals.insert(c);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  EXPECT_EQ(vals.size(), 16u);  // all distinct
  EXPECT_DOUBLE_EQ(lo, 0.002);
  EXPECT_DOUBLE_EQ(hi, 0.05);
}

}  // namespace
