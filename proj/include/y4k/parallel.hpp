// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace y4k {

/// Worker count used by kernels. Resolution order: set_thread_count()
/// override, then the Y4K_THREADS environment variable, then hardware
/// concurrency. Zero at either level means "auto".
int thread_count();

/// Programmatic override of the worker count; 0 restores env/auto resolution.
void set_thread_count(int threads);

/// Runs fn(i) for i in [0, count). Items are split into contiguous chunks,
/// one per worker. Work below `serial_cutoff` total cost runs inline.
/// Each index is processed by exactly one worker, so results that depend only
/// on i are independent of the thread count.
void parallel_for(std::int64_t count, std::int64_t cost_per_item,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace y4k
