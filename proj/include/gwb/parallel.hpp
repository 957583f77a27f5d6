#pragma once

#include <cstddef>
#include <functional>

namespace gwb {

/// Worker count: GWB_THREADS if set to a positive integer, else the number
/// of hardware threads.
std::size_t thread_count();

/// Runs body(0..n-1) on up to thread_count() threads. Each index runs
/// exactly once; the first exception thrown is rethrown after all workers
/// have joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gwb
