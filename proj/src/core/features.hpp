// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace nfsim
{

struct SensingSelection
{
  std::vector<std::size_t> indices;  // strictly increasing, 0-based subcarrier slots

  void Validate(std::size_t n_subcarriers) const;
};

// Keeps the selected k-slices of an (N_r, N_t, K, N_p) tensor, in order.
ComplexTensor SelectSubcarriers(const ComplexTensor &tensor, const SensingSelection &sel);

// Real-valued classifier input, axes (2, N_r, N_t, N_p, K_sel); channel 0 real, 1 imaginary.
struct RealFeatureTensor
{
  RealTensor u;
  double scale = 1.0;  // M, the max complex magnitude divided out by Normalize
  bool degenerate = false;
};

RealFeatureTensor ToReal(const ComplexTensor &reduced);
ComplexTensor FromReal(const RealFeatureTensor &features);

// Divides by M = max |U0 + j U1|. An all-zero input is returned unchanged and flagged.
RealFeatureTensor Normalize(const RealFeatureTensor &features);

struct Fft4dOptions
{
  std::size_t pad_factor = 1;  // 1 or 4; zero-pads every axis
};

// |DFT| of an (N_r, N_t, K_sel, N_p) tensor with axes reordered to (rx, tx, Doppler, range).
// Spatial and Doppler axes use the forward kernel e^{-j}, the range axis the delay kernel
// e^{+j}; none is normalized. Each axis is DC-centered: output index i holds signed bin
// i - floor(N / 2).
RealTensor Fft4dSpectrum(const ComplexTensor &reduced, const Fft4dOptions &opts = {});

// Complex counterpart of Fft4dSpectrum, without the magnitude.
ComplexTensor Fft4dTransform(const ComplexTensor &reduced, const Fft4dOptions &opts = {});

// Fft4dSpectrum averaged over both angle axes: an (N_p, K_sel) Doppler x range map.
RealTensor Fft4dFeatures(const ComplexTensor &reduced, const Fft4dOptions &opts = {});
RealTensor Fft4dFeatures(const RealFeatureTensor &features, const Fft4dOptions &opts = {});

// Signed bin held by DC-centered index i on an axis of length n.
inline long CenteredBin(std::size_t i, std::size_t n)
{
  return static_cast<long>(i) - static_cast<long>(n / 2);
}

// Long-format CSV: doppler_bin,range_bin,magnitude.
std::string Fft4dMapCsv(const RealTensor &map);

}  // namespace nfsim
