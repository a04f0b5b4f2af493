#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace fungibility::detail {

/// Runs fn(task) for task in [0, tasks) on up to `threads` workers. Tasks are
/// claimed in ascending order; callers must write results into per-task slots
/// so the output does not depend on scheduling.
template <typename Fn>
void parallel_tasks(std::size_t tasks, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < tasks; i = next++) fn(i);
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
}

}  // namespace fungibility::detail
