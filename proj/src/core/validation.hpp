// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nfsim
{

struct CheckResult
{
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  double seconds = 0.0;
};

struct ValidationOptions
{
  std::uint64_t seed = 20260101;
  // Mutation hook: flips the static self-term sign in every solve the suite runs.
  bool flip_self_term = false;
};

// Physics self-checks: Green/dipole identities, zero-contrast nulling, Clausius-Mossotti,
// Born slope, fast-path equivalence, single-voxel phase checks, sample round trip.
std::vector<CheckResult> RunValidation(const ValidationOptions &opts = {});

// "name measured bound status" per line.
std::string FormatValidation(const std::vector<CheckResult> &results);

struct BenchRow
{
  std::size_t n_s = 0;
  double dense_seconds = 0.0;
  double fft_seconds = 0.0;
  std::size_t fft_iterations = 0;
  double h_relative_difference = 0.0;
};

// dense_direct vs iterative_fft on an N_s-voxel lattice block, one row per size.
std::vector<BenchRow> RunBench(const std::vector<std::size_t> &sizes);
std::string BenchCsv(const std::vector<BenchRow> &rows);

}  // namespace nfsim
