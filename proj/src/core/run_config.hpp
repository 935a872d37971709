// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/array_geometry.hpp"
#include "core/channel_synth.hpp"
#include "core/scene.hpp"
#include "core/vie_solver.hpp"

namespace nfsim
{

enum class SampleFormat
{
  RawComplex,  // reduced (N_r, N_t, K_sel, N_p) complex64 tensor, normalization M in metadata
  Features,    // normalized (2, N_r, N_t, N_p, K_sel) float32 tensor
};

std::string ToString(SampleFormat f);
SampleFormat SampleFormatFromString(const std::string &s);

struct SplitRatios
{
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;

  std::array<double, 3> AsArray() const { return {train, val, test}; }
  void Validate() const;
};

// Everything that determines a generated dataset except the master seed and output path.
struct RunConfig
{
  std::size_t n_samples = 8;
  std::uint64_t master_seed = 1;
  std::array<double, kNumClasses> class_mix{0.5, 0.5};
  SampleFormat sample_format = SampleFormat::RawComplex;

  ArraySpec array;
  std::size_t n_subcarriers = 64;
  double spacing_hz = 120e3;
  std::vector<std::size_t> sensing_indices{0, 16, 32, 48};

  std::size_t n_frames = 4;
  double dt = 0.01;

  double voxel_pitch = 0.24;
  GeometryParams geometry;

  SolverConfig solver;

  bool noise_enabled = true;
  double snr_db = 20.0;
  double r_ref = 50.0;

  SplitRatios split;

  SubcarrierPlan Plan() const;
  NoiseConfig Noise(std::uint64_t seed) const;
  void Validate() const;
};

// Desk-scale defaults (150 MHz carrier, 8 x 8 array).
RunConfig DefaultRunConfig();

// INI text. Unknown sections/keys and malformed values are Config errors naming the line and key.
RunConfig ParseRunConfig(const std::string &ini_text, const std::string &source_name = "<config>");
RunConfig LoadRunConfig(const std::string &path);

// "section.key=value"; same validation as the file.
void ApplyOverride(RunConfig &cfg, const std::string &assignment);
void SetConfigValue(RunConfig &cfg, const std::string &section, const std::string &key, const std::string &value);

// Canonical INI text of every key in schema order, full round-trip precision.
std::string DumpRunConfig(const RunConfig &cfg);

// SHA-256 (hex) of the canonical text with run.master_seed omitted.
std::string ConfigHash(const RunConfig &cfg);

std::string Sha256Hex(const std::string &bytes);

struct ConfigKeyInfo
{
  std::string section;
  std::string key;
  std::string help;
};
std::vector<ConfigKeyInfo> ConfigSchema();

}  // namespace nfsim
