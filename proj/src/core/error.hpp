// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nfsim
{

// Mirrors nfsim_status in the C header; keep the numeric values in sync.
enum class ErrorCode : int
{
  InvalidArgument = 1,
  Domain = 2,
  Config = 3,
  Io = 4,
  Format = 5,
  NotConverged = 6,
  Singular = 7,
  Internal = 8,
};

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string &what)
{
  throw Error(code, what);
}

}  // namespace nfsim
