#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace kfsslab {

/// Worker count: KFSSLAB_THREADS if set to a positive integer, otherwise
/// std::thread::hardware_concurrency() (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, count) across worker_count() threads. If any
/// call throws, the exception from the lowest failing index is rethrown
/// after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Evaluates fn over [0, count) and returns the results in index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn) {
  std::vector<T> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace kfsslab
