// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

namespace nfsim
{

// Structured diagnostics: one JSON object per line. Disabled until a sink is set.
void SetLogSink(std::ostream *sink);
bool LogEnabled();
void LogRecord(const nlohmann::json &record);

}  // namespace nfsim
