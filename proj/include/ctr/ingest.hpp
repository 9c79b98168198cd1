#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ctr/errors.hpp"

namespace ctr {

enum class Event { view, click };

/// One line of the transaction log: an ad was served (view) or clicked.
struct Transaction {
  std::int64_t timestamp_ms = 0;
  std::string user_id;
  std::string banner_id;
  std::string url;
  Event event = Event::view;
};

struct LabeledObservation {
  std::string user_id;
  std::string banner_id;
  std::string url;
  int label = 0;  // click = 1
};

struct ParseStats {
  std::size_t parsed = 0;
  std::size_t malformed = 0;
};

inline constexpr std::int64_t kMsPerDay = 86'400'000;

/// Everything from the first '?' on is dropped, '?' included. Idempotent.
inline std::string strip_query_string(std::string_view url) {
  auto pos = url.find('?');
  return std::string(pos == std::string_view::npos ? url : url.substr(0, pos));
}

inline std::int64_t day_of_ms(std::int64_t ts_ms) {
  std::int64_t d = ts_ms / kMsPerDay;
  if (ts_ms % kMsPerDay < 0) --d;
  return d;
}

inline std::int64_t day_of(const Transaction& t) { return day_of_ms(t.timestamp_ms); }

namespace detail {
inline bool parse_i64(std::string_view s, std::int64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e && !s.empty();
}
}  // namespace detail

/// Parse a TSV transaction stream (timestamp, user_id, banner_id, url, event).
/// Malformed lines are counted and skipped; URLs come back query-stripped.
/// A majority of malformed lines means we were pointed at the wrong file.
inline std::vector<Transaction> parse_transactions(std::istream& in,
                                                   ParseStats* stats = nullptr) {
  std::vector<Transaction> out;
  ParseStats st;
  std::string line;
  std::size_t total = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++total;
    std::string_view sv(line);
    std::string_view f[5];
    std::size_t nf = 0;
    std::size_t start = 0;
    bool overflow = false;
    for (std::size_t i = 0; i <= sv.size(); ++i) {
      if (i == sv.size() || sv[i] == '\t') {
        if (nf == 5) {
          overflow = true;
          break;
        }
        f[nf++] = sv.substr(start, i - start);
        start = i + 1;
      }
    }
    Transaction t;
    bool ok = !overflow && nf == 5;
    if (ok) ok = detail::parse_i64(f[0], t.timestamp_ms);
    if (ok) {
      if (f[4] == "view")
        t.event = Event::view;
      else if (f[4] == "click")
        t.event = Event::click;
      else
        ok = false;
    }
    if (ok) {
      t.user_id = std::string(f[1]);
      t.banner_id = std::string(f[2]);
      t.url = strip_query_string(f[3]);
      ok = !t.user_id.empty() && !t.banner_id.empty() && !t.url.empty();
    }
    if (ok) {
      ++st.parsed;
      out.push_back(std::move(t));
    } else {
      ++st.malformed;
    }
  }
  if (in.bad()) throw IoError("parse_transactions: stream read error");
  if (total > 0 && st.malformed * 2 > total)
    throw FormatError("parse_transactions: " + std::to_string(st.malformed) + "/" +
                      std::to_string(total) +
                      " lines malformed; input is not a transaction log");
  if (stats) *stats = st;
  return out;
}

/// Train/test split on calendar day: test day exactly, everything earlier
/// trains, anything later is a leak and rejected.
inline std::pair<std::vector<Transaction>, std::vector<Transaction>> split_by_day(
    const std::vector<Transaction>& log, std::int64_t test_day) {
  std::vector<Transaction> train, test;
  for (const auto& t : log) {
    std::int64_t d = day_of(t);
    if (d > test_day)
      throw ValidationError("split_by_day: transaction on day " + std::to_string(d) +
                            " is after test day " + std::to_string(test_day));
    (d == test_day ? test : train).push_back(t);
  }
  return {std::move(train), std::move(test)};
}

/// Join clicks onto impressions: a view becomes a label-1 observation when a
/// click with the same (user, banner, url) exists on the same day.
inline std::vector<LabeledObservation> label_observations(
    const std::vector<Transaction>& txns) {
  std::unordered_set<std::string> clicked;
  for (const auto& t : txns) {
    if (t.event == Event::click)
      clicked.insert(t.user_id + '\t' + t.banner_id + '\t' + t.url + '\t' +
                     std::to_string(day_of(t)));
  }
  std::vector<LabeledObservation> obs;
  for (const auto& t : txns) {
    if (t.event != Event::view) continue;
    std::string key = t.user_id + '\t' + t.banner_id + '\t' + t.url + '\t' +
                      std::to_string(day_of(t));
    obs.push_back({t.user_id, t.banner_id, t.url, clicked.count(key) ? 1 : 0});
  }
  return obs;
}

/// Distinct URLs each user viewed, in first-seen order.
inline std::unordered_map<std::string, std::vector<std::string>> user_url_history(
    const std::vector<Transaction>& txns) {
  std::unordered_map<std::string, std::vector<std::string>> hist;
  std::unordered_set<std::string> seen;
  for (const auto& t : txns) {
    if (t.event != Event::view) continue;
    std::string key = t.user_id + '\t' + t.url;
    if (seen.insert(std::move(key)).second) hist[t.user_id].push_back(t.url);
  }
  return hist;
}

}  // namespace ctr
