#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace byzfuse {

inline constexpr const char *kThreadsEnv = "BYZFUSE_THREADS";

/// requested > 0 wins, then the environment override, then hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char *env = std::getenv(kThreadsEnv)) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(t, acc, ws) for t in [0, trials). Trials are grouped in
/// fixed-size chunks; each chunk gets a fresh accumulator from make_acc() and
/// chunks are merged in index order, so floating-point sums do not depend on
/// the number of threads. ws is per-worker scratch from make_ws() and must not
/// carry results between trials.
template <class Acc, class MakeAcc, class MakeWs, class Body>
Acc run_trials(std::uint64_t trials, unsigned threads, MakeAcc make_acc, MakeWs make_ws, Body body,
               std::uint64_t chunk = 512) {
  const std::uint64_t nchunks = (trials + chunk - 1) / chunk;
  std::vector<Acc> partial;
  partial.reserve(nchunks);
  for (std::uint64_t c = 0; c < nchunks; ++c) partial.push_back(make_acc());
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    auto ws = make_ws();
    for (std::uint64_t c; (c = next.fetch_add(1)) < nchunks;) {
      const std::uint64_t lo = c * chunk, hi = std::min(trials, lo + chunk);
      for (std::uint64_t t = lo; t < hi; ++t) body(t, partial[c], ws);
    }
  };
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(resolve_threads(threads), std::max<std::uint64_t>(nchunks, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
  }
  Acc total = make_acc();
  for (auto &p : partial) total += p;
  return total;
}

template <class Acc, class MakeAcc, class Body>
Acc run_trials(std::uint64_t trials, unsigned threads, MakeAcc make_acc, Body body, std::uint64_t chunk = 512) {
  return run_trials<Acc>(
      trials, threads, make_acc, [] { return 0; },
      [&](std::uint64_t t, Acc &acc, int &) { body(t, acc); }, chunk);
}

// Element-wise summing counter vector, the usual accumulator.
template <class T>
struct Tally {
  std::vector<T> v;
  explicit Tally(std::size_t k = 0) : v(k, T{}) {}
  Tally &operator+=(const Tally &o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
  }
  T &operator[](std::size_t i) { return v[i]; }
  const T &operator[](std::size_t i) const { return v[i]; }
};

}  // namespace byzfuse
