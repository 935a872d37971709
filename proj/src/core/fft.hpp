// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nfsim
{

enum class FftSign : int
{
  Forward = -1,  // sum x[n] e^{-2 pi j n k / N}
  Backward = 1,  // sum x[n] e^{+2 pi j n k / N}
};

// Buffer allocated with fftw_malloc so plans can use SIMD alignment.
class FftBuffer
{
public:
  FftBuffer() = default;
  explicit FftBuffer(std::size_t n);

  std::complex<double> *data() { return data_.get(); }
  const std::complex<double> *data() const { return data_.get(); }
  std::size_t size() const { return size_; }
  std::span<std::complex<double>> span() { return {data_.get(), size_}; }
  void Zero();

private:
  struct Deleter
  {
    void operator()(std::complex<double> *p) const;
  };
  std::unique_ptr<std::complex<double>[], Deleter> data_;
  std::size_t size_ = 0;
};

// In-place unnormalized DFT over a subset of axes of a row-major array. Planning and
// destruction are serialized internally; Execute is safe to call concurrently on
// distinct plans.
class FftPlan
{
public:
  FftPlan(std::complex<double> *data, std::span<const int> dims, std::span<const int> axes, FftSign sign);
  ~FftPlan();
  FftPlan(const FftPlan &) = delete;
  FftPlan &operator=(const FftPlan &) = delete;

  void Execute();

private:
  void *plan_ = nullptr;
};

// One-shot convenience over a std::vector (plans with FFTW_ESTIMATE each call).
void TransformAxes(std::vector<std::complex<double>> &data, std::span<const int> dims, std::span<const int> axes,
                   FftSign sign);

}  // namespace nfsim
