// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nfsim
{

namespace
{

std::atomic<std::size_t> g_override{0};
thread_local bool t_in_worker = false;  // nested loops run serially inside a worker

std::uint64_t SplitMix(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::size_t ThreadCount()
{
  if (const std::size_t n = g_override.load(); n > 0)
  {
    return n;
  }
  if (const char *env = std::getenv("NFSIM_THREADS"))
  {
    try
    {
      const long v = std::stol(env);
      if (v > 0)
      {
        return static_cast<std::size_t>(v);
      }
    }
    catch (const std::exception &)
    {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void SetThreadCount(std::size_t n)
{
  g_override.store(n);
}

void ParallelFor(std::size_t n, const std::function<void(std::size_t)> &body)
{
  const std::size_t workers = t_in_worker ? 1 : std::min(ThreadCount(), n);
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&](std::size_t i) {
    try
    {
      body(i);
    }
    catch (...)
    {
      std::lock_guard lock(failure_mutex);
      if (i < failed_index)
      {
        failed_index = i;
        failure = std::current_exception();
      }
    }
  };
  if (workers <= 1)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      run(i);
    }
  }
  else
  {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
      pool.emplace_back([&] {
        t_in_worker = true;
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
        {
          run(i);
        }
      });
    }
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }
}

std::uint64_t DeriveSeed(std::uint64_t base, std::initializer_list<std::uint64_t> tags)
{
  std::uint64_t h = SplitMix(base);
  for (std::uint64_t t : tags)
  {
    h = SplitMix(h ^ SplitMix(t + 0x632BE59BD9B4E019ULL));
  }
  return h;
}

}  // namespace nfsim
