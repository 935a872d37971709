// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "core/error.hpp"

namespace nfsim
{

// Dense row-major tensor (last index fastest).
template <typename T>
class Tensor
{
public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, T fill = T{}) : dims_(std::move(dims))
  {
    data_.assign(Count(dims_), fill);
  }
  Tensor(std::vector<std::size_t> dims, std::vector<T> data) : dims_(std::move(dims)), data_(std::move(data))
  {
    if (data_.size() != Count(dims_))
    {
      Fail(ErrorCode::InvalidArgument, "tensor: data length does not match dims");
    }
  }

  const std::vector<std::size_t> &dims() const { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  std::vector<T> &data() { return data_; }
  const std::vector<T> &data() const { return data_; }

  template <typename... I>
  T &operator()(I... idx)
  {
    return data_[Offset({static_cast<std::size_t>(idx)...})];
  }
  template <typename... I>
  const T &operator()(I... idx) const
  {
    return data_[Offset({static_cast<std::size_t>(idx)...})];
  }

  std::size_t Offset(std::initializer_list<std::size_t> idx) const
  {
    std::size_t off = 0;
    std::size_t axis = 0;
    for (std::size_t i : idx)
    {
      off = off * dims_[axis] + i;
      ++axis;
    }
    return off;
  }

  bool operator==(const Tensor &other) const = default;

  static std::size_t Count(const std::vector<std::size_t> &dims)
  {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }

private:
  std::vector<std::size_t> dims_;
  std::vector<T> data_;
};

using ComplexTensor = Tensor<std::complex<double>>;
using RealTensor = Tensor<double>;

}  // namespace nfsim
