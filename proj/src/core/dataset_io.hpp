// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/run_config.hpp"
#include "core/tensor.hpp"

namespace nfsim
{

inline constexpr std::uint16_t kSampleFormatVersion = 1;
inline constexpr std::size_t kSampleHeaderBytes = 40;
inline constexpr std::size_t kMaxSampleRank = 5;

enum class SampleDtype : std::uint16_t
{
  Complex64 = 1,  // interleaved (re, im) float32 pairs
  Float32 = 2,
};

// One file: 40-byte little-endian header, UTF-8 JSON metadata, row-major payload.
struct DatasetSample
{
  SampleDtype dtype = SampleDtype::Complex64;
  std::vector<std::uint32_t> dims;
  std::vector<float> payload;  // 2 floats per element for Complex64
  std::int32_t label = 0;
  std::string metadata = "{}";

  static DatasetSample FromComplex(const ComplexTensor &t, std::int32_t label, const nlohmann::json &metadata);
  static DatasetSample FromReal(const RealTensor &t, std::int32_t label, const nlohmann::json &metadata);
  ComplexTensor ToComplex() const;
  RealTensor ToReal() const;
  nlohmann::json Metadata() const;
  std::size_t ElementCount() const;

  bool operator==(const DatasetSample &) const = default;
};

std::vector<std::uint8_t> EncodeSample(const DatasetSample &sample);
DatasetSample DecodeSample(const std::vector<std::uint8_t> &bytes, const std::string &source = "<memory>");
void WriteSample(const std::filesystem::path &path, const DatasetSample &sample);
DatasetSample ReadSample(const std::filesystem::path &path);

// "samples/000042.bin"
std::string SampleRelativePath(std::size_t id);

enum class Split : int
{
  Train = 0,
  Val = 1,
  Test = 2,
};
std::string ToString(Split s);

// Stratified by label; per class the counts are floor(ratio * n) plus largest-remainder
// top-up, then members are drawn by a seeded shuffle. Deterministic in (labels, ratios, seed).
std::vector<Split> SplitDataset(const std::vector<int> &labels, const SplitRatios &ratios, std::uint64_t seed);

// Reassigns the manifest's splits in place.
void SplitManifest(nlohmann::json &manifest, const SplitRatios &ratios, std::uint64_t seed);

nlohmann::json ReadManifest(const std::filesystem::path &root);
void WriteManifest(const std::filesystem::path &root, const nlohmann::json &manifest);

// Manifest-vs-files check: every listed sample exists, parses, and matches the manifest's
// dims, dtype and label; no unlisted sample files. Throws Format errors.
void VerifyDataset(const std::filesystem::path &root);

struct SampleFailure
{
  std::size_t id = 0;
  std::string error;
};

struct GenerateReport
{
  nlohmann::json manifest;
  std::size_t requested = 0;
  std::size_t written = 0;
  std::vector<SampleFailure> failures;
  std::array<std::size_t, kNumClasses> class_counts{};
  double sigma_h = 0.0;
  double wall_seconds = 0.0;
  std::size_t total_iterations = 0;
  double max_residual = 0.0;
  std::string summary_hash;  // SHA-256 over the manifest and every sample file, in id order
};

// Simulates cfg.n_samples dwells into <root>/samples/<id>.bin plus <root>/manifest and
// <root>/config.ini. Stale sample files from an earlier run in the same root are removed.
GenerateReport GenerateDataset(const RunConfig &cfg, const std::filesystem::path &root);

enum class FeatureMode
{
  StfInput,  // normalized (2, N_r, N_t, N_p, K_sel) float32
  Fft4d,     // (N_p, K_sel) Doppler x range map, plus one CSV per sample
};
FeatureMode FeatureModeFromString(const std::string &s);
std::string ToString(FeatureMode m);

struct FeatureReport
{
  std::size_t samples = 0;
  std::vector<std::uint32_t> dims;
};

// Featurizes every sample of a dataset into <out>/samples/<id>.bin with its own manifest;
// fft4d additionally writes <out>/csv/<id>.csv.
FeatureReport FeaturizeDataset(const std::filesystem::path &dataset, FeatureMode mode, const std::filesystem::path &out,
                               std::size_t pad_factor = 1);

// SHA-256 over the manifest bytes and every sample file listed in it.
std::string DatasetHash(const std::filesystem::path &root);

}  // namespace nfsim
