// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>

namespace nfsim
{

// Worker count: SetThreadCount override, else NFSIM_THREADS, else hardware concurrency.
std::size_t ThreadCount();
void SetThreadCount(std::size_t n);

// Runs body(i) for i in [0, n). If any call throws, the exception from the lowest index
// is rethrown after all workers stop. Calls made from inside a worker run serially.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)> &body);

// Counter-based seed derivation (splitmix64 mixing), independent of execution order.
std::uint64_t DeriveSeed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

}  // namespace nfsim
