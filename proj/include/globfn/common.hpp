#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace globfn {

using Vector = std::vector<double>;

/// Thrown when an argument violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an instance exceeds the evaluation budget.
class BudgetExceeded : public std::length_error {
public:
  using std::length_error::length_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

/// sign(r) with the selection sign(0) := 0.
inline double sign0(double r) {
  return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
}

/// n^k, or SIZE_MAX when it overflows.
inline std::size_t checked_power(std::size_t n, std::size_t k) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (n != 0 && out > SIZE_MAX / n) return SIZE_MAX;
    out *= n;
  }
  return out;
}

/// Visits every k-tuple of indices in [0, n) in odometer order (last index
/// fastest). The callback receives the products of the selected entries of
/// `a` and of `b`. Prefix products are cached per position, so moving the
/// odometer by one step recomputes only the suffix that changed.
template <class Callback>
void for_each_tuple_product(std::span<const double> a, std::span<const double> b,
                            std::size_t k, Callback&& callback) {
  const std::size_t n = a.size();
  if (k == 0) {
    callback(1.0, 1.0);
    return;
  }
  if (n == 0) return;
  std::vector<std::size_t> idx(k, 0);
  // prefix_a[j] = a[idx[0]] * ... * a[idx[j-1]]
  std::vector<double> prefix_a(k + 1, 1.0), prefix_b(k + 1, 1.0);
  std::size_t dirty = 0;
  for (;;) {
    for (std::size_t j = dirty; j < k; ++j) {
      prefix_a[j + 1] = prefix_a[j] * a[idx[j]];
      prefix_b[j + 1] = prefix_b[j] * b[idx[j]];
    }
    callback(prefix_a[k], prefix_b[k]);
    std::size_t pos = k;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < n) break;
      idx[pos] = 0;
      if (pos == 0) return;
    }
    dirty = pos;
  }
}

/// Number of worker threads to use; 0 selects the hardware concurrency.
inline std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(begin, end) over disjoint chunks of [0, count). Each chunk must
/// write only to its own slots; results are then independent of scheduling.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  threads = std::min(resolve_threads(threads), std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& w : workers) w.join();
}

/// SplitMix64 finalizer, used to derive independent RNG seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = mix64(seed);
  for (auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

/// 17 significant digits: enough for an exact double round trip.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

}  // namespace globfn
