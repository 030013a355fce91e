// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace spectra {

/// Resolves a requested worker count: 0 means all hardware threads.
int resolveThreads(int requested);

/// Calls `body(begin, end)` over disjoint chunks of [0, count) on up to
/// `threads` workers. Chunk boundaries depend only on `count` and
/// `chunk`, never on the worker count. The first exception thrown by any
/// chunk (lowest chunk index) is rethrown after all workers finish.
void parallelFor(std::size_t count, int threads, std::size_t chunk,
                 const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace spectra
