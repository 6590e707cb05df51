// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace specrec {

// 0 means "hardware concurrency".
std::size_t resolve_workers(std::size_t requested);

// Runs fn(i) for i in [0, count) over up to `workers` threads. Each index runs
// exactly once; callers write into per-index slots so results do not depend on
// scheduling. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace specrec
