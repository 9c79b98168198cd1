#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ctr::par {

namespace detail {
inline int& workers_ref() {
  static int w = 1;
  return w;
}
}  // namespace detail

inline int workers() { return detail::workers_ref(); }

inline void set_workers(int w) { detail::workers_ref() = w < 1 ? 1 : w; }

/// Run fn(block_index, begin, end) over fixed-size blocks of [0, n).
/// The block partition depends only on `grain`, never on the worker count,
/// and results written per block are deterministic under any scheduling.
template <typename Fn>
void for_blocks(std::size_t n, std::size_t grain, Fn&& fn) {
  if (n == 0) return;
  if (grain == 0) grain = 1;
  const std::size_t nb = (n + grain - 1) / grain;
  const int nw = std::min<std::size_t>(workers(), nb);
  if (nw <= 1) {
    for (std::size_t b = 0; b < nb; ++b)
      fn(b, b * grain, std::min(n, (b + 1) * grain));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= nb || failed.load(std::memory_order_relaxed)) return;
      try {
        fn(b, b * grain, std::min(n, (b + 1) * grain));
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> ts;
  ts.reserve(nw - 1);
  for (int i = 1; i < nw; ++i) ts.emplace_back(work);
  work();
  for (auto& t : ts) t.join();
  if (err) std::rethrow_exception(err);
}

/// Deterministic parallel sum: per-block partials combined in block order.
template <typename Fn>
double sum_blocks(std::size_t n, std::size_t grain, Fn&& partial) {
  if (n == 0) return 0.0;
  if (grain == 0) grain = 1;
  const std::size_t nb = (n + grain - 1) / grain;
  std::vector<double> parts(nb, 0.0);
  for_blocks(n, grain, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    parts[b] = partial(lo, hi);
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

}  // namespace ctr::par
