// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "core/error.hpp"
#include "core/fft.hpp"

namespace nfsim
{

namespace
{

void CheckComplexRank(const ComplexTensor &t, const char *what)
{
  if (t.rank() != 4)
  {
    Fail(ErrorCode::InvalidArgument, std::string(what) + ": expected an (N_r, N_t, K, N_p) tensor");
  }
}

}  // namespace

void SensingSelection::Validate(std::size_t n_subcarriers) const
{
  if (indices.empty())
  {
    Fail(ErrorCode::InvalidArgument, "selection: must be non-empty");
  }
  for (std::size_t i = 0; i < indices.size(); ++i)
  {
    if (indices[i] >= n_subcarriers)
    {
      std::ostringstream msg;
      msg << "selection: subcarrier index " << indices[i] << " out of range for K = " << n_subcarriers;
      Fail(ErrorCode::InvalidArgument, msg.str());
    }
    if (i > 0 && indices[i] <= indices[i - 1])
    {
      Fail(ErrorCode::InvalidArgument, "selection: indices must be strictly increasing");
    }
  }
}

ComplexTensor SelectSubcarriers(const ComplexTensor &tensor, const SensingSelection &sel)
{
  CheckComplexRank(tensor, "select_subcarriers");
  sel.Validate(tensor.dim(2));
  const std::size_t nr = tensor.dim(0);
  const std::size_t nt = tensor.dim(1);
  const std::size_t np = tensor.dim(3);
  ComplexTensor out({nr, nt, sel.indices.size(), np});
  for (std::size_t r = 0; r < nr; ++r)
  {
    for (std::size_t t = 0; t < nt; ++t)
    {
      for (std::size_t k = 0; k < sel.indices.size(); ++k)
      {
        for (std::size_t m = 0; m < np; ++m)
        {
          out(r, t, k, m) = tensor(r, t, sel.indices[k], m);
        }
      }
    }
  }
  return out;
}

RealFeatureTensor ToReal(const ComplexTensor &reduced)
{
  CheckComplexRank(reduced, "to_real");
  const std::size_t nr = reduced.dim(0);
  const std::size_t nt = reduced.dim(1);
  const std::size_t nk = reduced.dim(2);
  const std::size_t np = reduced.dim(3);
  RealFeatureTensor f;
  f.u = RealTensor({2, nr, nt, np, nk});
  for (std::size_t r = 0; r < nr; ++r)
  {
    for (std::size_t t = 0; t < nt; ++t)
    {
      for (std::size_t k = 0; k < nk; ++k)
      {
        for (std::size_t m = 0; m < np; ++m)
        {
          const auto h = reduced(r, t, k, m);
          f.u(0, r, t, m, k) = h.real();
          f.u(1, r, t, m, k) = h.imag();
        }
      }
    }
  }
  return f;
}

ComplexTensor FromReal(const RealFeatureTensor &features)
{
  const RealTensor &u = features.u;
  if (u.rank() != 5 || u.dim(0) != 2)
  {
    Fail(ErrorCode::InvalidArgument, "feature tensor must have axes (2, N_r, N_t, N_p, K_sel)");
  }
  const std::size_t nr = u.dim(1);
  const std::size_t nt = u.dim(2);
  const std::size_t np = u.dim(3);
  const std::size_t nk = u.dim(4);
  ComplexTensor out({nr, nt, nk, np});
  for (std::size_t r = 0; r < nr; ++r)
  {
    for (std::size_t t = 0; t < nt; ++t)
    {
      for (std::size_t m = 0; m < np; ++m)
      {
        for (std::size_t k = 0; k < nk; ++k)
        {
          out(r, t, k, m) = {u(0, r, t, m, k), u(1, r, t, m, k)};
        }
      }
    }
  }
  return out;
}

RealFeatureTensor Normalize(const RealFeatureTensor &features)
{
  const RealTensor &u = features.u;
  if (u.rank() != 5 || u.dim(0) != 2)
  {
    Fail(ErrorCode::InvalidArgument, "normalize: feature tensor must have axes (2, N_r, N_t, N_p, K_sel)");
  }
  const std::size_t half = u.size() / 2;
  const auto &d = u.data();
  double peak = 0.0;
  for (std::size_t i = 0; i < half; ++i)
  {
    peak = std::max(peak, std::hypot(d[i], d[half + i]));
  }
  RealFeatureTensor out = features;
  if (peak == 0.0)
  {
    out.scale = 0.0;
    out.degenerate = true;
    return out;
  }
  for (double &x : out.u.data())
  {
    x /= peak;
  }
  out.scale = peak;
  out.degenerate = false;
  return out;
}

ComplexTensor Fft4dTransform(const ComplexTensor &reduced, const Fft4dOptions &opts)
{
  CheckComplexRank(reduced, "fft4d");
  if (opts.pad_factor != 1 && opts.pad_factor != 4)
  {
    Fail(ErrorCode::InvalidArgument, "fft4d: pad factor must be 1 or 4");
  }
  const std::size_t nr = reduced.dim(0);
  const std::size_t nt = reduced.dim(1);
  const std::size_t nk = reduced.dim(2);
  const std::size_t np = reduced.dim(3);
  if (np == 0 || nk == 0)
  {
    Fail(ErrorCode::InvalidArgument, "fft4d: need N_p >= 1 and K_sel >= 1");
  }
  const std::size_t p = opts.pad_factor;
  const std::array<std::size_t, 4> out_dims{nr * p, nt * p, np * p, nk * p};
  ComplexTensor work({out_dims[0], out_dims[1], out_dims[2], out_dims[3]});
  for (std::size_t r = 0; r < nr; ++r)
  {
    for (std::size_t t = 0; t < nt; ++t)
    {
      for (std::size_t k = 0; k < nk; ++k)
      {
        for (std::size_t m = 0; m < np; ++m)
        {
          work(r, t, m, k) = reduced(r, t, k, m);
        }
      }
    }
  }
  const std::array<int, 4> dims{static_cast<int>(out_dims[0]), static_cast<int>(out_dims[1]),
                                static_cast<int>(out_dims[2]), static_cast<int>(out_dims[3])};
  const std::array<int, 3> forward_axes{0, 1, 2};
  const std::array<int, 1> delay_axis{3};
  TransformAxes(work.data(), dims, forward_axes, FftSign::Forward);
  TransformAxes(work.data(), dims, delay_axis, FftSign::Backward);

  ComplexTensor shifted({out_dims[0], out_dims[1], out_dims[2], out_dims[3]});
  auto src = [&](std::size_t i, std::size_t axis) {
    const std::size_t n = out_dims[axis];
    return (i + n - n / 2) % n;
  };
  for (std::size_t a = 0; a < out_dims[0]; ++a)
  {
    for (std::size_t b = 0; b < out_dims[1]; ++b)
    {
      for (std::size_t c = 0; c < out_dims[2]; ++c)
      {
        for (std::size_t d = 0; d < out_dims[3]; ++d)
        {
          shifted(a, b, c, d) = work(src(a, 0), src(b, 1), src(c, 2), src(d, 3));
        }
      }
    }
  }
  return shifted;
}

RealTensor Fft4dSpectrum(const ComplexTensor &reduced, const Fft4dOptions &opts)
{
  const ComplexTensor x = Fft4dTransform(reduced, opts);
  RealTensor mag(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    mag.data()[i] = std::abs(x.data()[i]);
  }
  return mag;
}

RealTensor Fft4dFeatures(const ComplexTensor &reduced, const Fft4dOptions &opts)
{
  const RealTensor spec = Fft4dSpectrum(reduced, opts);
  const std::size_t na = spec.dim(0);
  const std::size_t nb = spec.dim(1);
  const std::size_t nd = spec.dim(2);
  const std::size_t nrange = spec.dim(3);
  RealTensor map({nd, nrange});
  const double inv = 1.0 / static_cast<double>(na * nb);
  for (std::size_t a = 0; a < na; ++a)
  {
    for (std::size_t b = 0; b < nb; ++b)
    {
      for (std::size_t d = 0; d < nd; ++d)
      {
        for (std::size_t r = 0; r < nrange; ++r)
        {
          map(d, r) += spec(a, b, d, r) * inv;
        }
      }
    }
  }
  return map;
}

RealTensor Fft4dFeatures(const RealFeatureTensor &features, const Fft4dOptions &opts)
{
  return Fft4dFeatures(FromReal(features), opts);
}

std::string Fft4dMapCsv(const RealTensor &map)
{
  std::ostringstream out;
  out << "doppler_bin,range_bin,magnitude\n" << std::setprecision(17);
  for (std::size_t d = 0; d < map.dim(0); ++d)
  {
    for (std::size_t r = 0; r < map.dim(1); ++r)
    {
      out << CenteredBin(d, map.dim(0)) << ',' << CenteredBin(r, map.dim(1)) << ',' << map(d, r) << '\n';
    }
  }
  return out.str();
}

}  // namespace nfsim
