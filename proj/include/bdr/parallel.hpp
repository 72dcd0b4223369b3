// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace bdr {

/// Worker count: BDR_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
[[nodiscard]] unsigned thread_count();

/// Calls fn(i) for every i in [0, n) on up to `threads` workers (0 means
/// thread_count()). Indices are handed out dynamically; fn must only write
/// state owned by index i. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace bdr
