// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>

#include <fftw3.h>

#include "core/error.hpp"

namespace nfsim
{

namespace
{

std::mutex &PlannerMutex()
{
  static std::mutex m;
  return m;
}

}  // namespace

FftBuffer::FftBuffer(std::size_t n) : size_(n)
{
  auto *p = static_cast<std::complex<double> *>(fftw_malloc(sizeof(fftw_complex) * std::max<std::size_t>(n, 1)));
  if (p == nullptr)
  {
    Fail(ErrorCode::Internal, "fftw_malloc failed");
  }
  data_.reset(p);
  Zero();
}

void FftBuffer::Zero()
{
  if (data_)
  {
    std::memset(static_cast<void *>(data_.get()), 0, sizeof(fftw_complex) * size_);
  }
}

void FftBuffer::Deleter::operator()(std::complex<double> *p) const
{
  fftw_free(p);
}

FftPlan::FftPlan(std::complex<double> *data, std::span<const int> dims, std::span<const int> axes, FftSign sign)
{
  const int rank = static_cast<int>(dims.size());
  std::vector<int> stride(dims.size(), 1);
  for (int d = rank - 2; d >= 0; --d)
  {
    stride[static_cast<std::size_t>(d)] = stride[static_cast<std::size_t>(d + 1)] * dims[static_cast<std::size_t>(d + 1)];
  }
  std::vector<fftw_iodim> transform;
  std::vector<fftw_iodim> loop;
  for (int d = 0; d < rank; ++d)
  {
    const auto ud = static_cast<std::size_t>(d);
    const fftw_iodim io{dims[ud], stride[ud], stride[ud]};
    if (std::find(axes.begin(), axes.end(), d) != axes.end())
    {
      transform.push_back(io);
    }
    else
    {
      loop.push_back(io);
    }
  }
  auto *buf = reinterpret_cast<fftw_complex *>(data);
  std::lock_guard lock(PlannerMutex());
  plan_ = fftw_plan_guru_dft(static_cast<int>(transform.size()), transform.data(), static_cast<int>(loop.size()),
                             loop.data(), buf, buf, static_cast<int>(sign), FFTW_ESTIMATE);
  if (plan_ == nullptr)
  {
    Fail(ErrorCode::Internal, "FFTW could not create a plan");
  }
}

FftPlan::~FftPlan()
{
  std::lock_guard lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void FftPlan::Execute()
{
  fftw_execute(static_cast<fftw_plan>(plan_));
}

void TransformAxes(std::vector<std::complex<double>> &data, std::span<const int> dims, std::span<const int> axes,
                   FftSign sign)
{
  if (axes.empty() || data.empty())
  {
    return;
  }
  FftBuffer buf(data.size());
  std::copy(data.begin(), data.end(), buf.data());
  FftPlan plan(buf.data(), dims, axes, sign);
  plan.Execute();
  std::copy(buf.data(), buf.data() + data.size(), data.begin());
}

}  // namespace nfsim
