// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace y4k {
namespace {

std::atomic<int> g_override{0};

constexpr std::int64_t kSerialCutoff = 1 << 15;

}  // namespace

int thread_count() {
  if (int forced = g_override.load(); forced > 0) return forced;
  if (const char* env = std::getenv("Y4K_THREADS"); env != nullptr) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_thread_count(int threads) { g_override.store(std::max(0, threads)); }

void parallel_for(std::int64_t count, std::int64_t cost_per_item,
                  const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  const std::int64_t workers =
      std::min<std::int64_t>(thread_count(), count);
  if (workers <= 1 || count * std::max<std::int64_t>(cost_per_item, 1) < kSerialCutoff) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mu;
  const std::int64_t chunk = (count + workers - 1) / workers;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::int64_t w = 0; w < workers; ++w) {
      const std::int64_t begin = w * chunk;
      const std::int64_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          for (std::int64_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace y4k
