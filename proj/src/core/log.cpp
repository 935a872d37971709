// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/log.hpp"

#include <atomic>
#include <mutex>

namespace nfsim
{

namespace
{

std::mutex g_mutex;
std::atomic<std::ostream *> g_sink{nullptr};

}  // namespace

void SetLogSink(std::ostream *sink)
{
  std::lock_guard lock(g_mutex);
  g_sink.store(sink);
}

bool LogEnabled()
{
  return g_sink.load() != nullptr;
}

void LogRecord(const nlohmann::json &record)
{
  std::lock_guard lock(g_mutex);
  if (auto *sink = g_sink.load())
  {
    *sink << record.dump() << '\n';
    sink->flush();
  }
}

}  // namespace nfsim
