// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/array_geometry.hpp"

#include <cmath>

#include "core/error.hpp"

namespace nfsim
{

void ArrayGeometry::Validate() const
{
  if (tx_positions.empty() || rx_positions.empty())
  {
    Fail(ErrorCode::InvalidArgument, "array needs at least one tx and one rx element");
  }
  if (tx_moments.size() != tx_positions.size())
  {
    Fail(ErrorCode::InvalidArgument, "array: one dipole moment per tx element required");
  }
  if (rx_polarizations.size() != rx_positions.size())
  {
    Fail(ErrorCode::InvalidArgument, "array: one polarization per rx element required");
  }
  for (const auto &q : rx_polarizations)
  {
    if (std::abs(q.norm() - 1.0) > 1e-12)
    {
      Fail(ErrorCode::InvalidArgument, "array: rx polarizations must be unit vectors");
    }
  }
}

ArrayGeometry MakeCrossArray(const ArraySpec &spec)
{
  if (spec.n_tx == 0 || spec.n_rx == 0)
  {
    Fail(ErrorCode::InvalidArgument, "array: n_tx and n_rx must be >= 1");
  }
  if (spec.tx_moment_axis.norm() == 0.0 || spec.rx_polarization.norm() == 0.0)
  {
    Fail(ErrorCode::InvalidArgument, "array: moment axis and polarization must be nonzero");
  }
  ArrayGeometry a;
  a.lambda_c = constants::c0 / spec.carrier_hz;
  a.spacing = 0.5 * a.lambda_c;
  const CVec3 moment = (spec.tx_moment_magnitude * spec.tx_moment_axis.normalized()).cast<cdouble>();
  const Vec3 pol = spec.rx_polarization.normalized();
  for (std::size_t t = 0; t < spec.n_tx; ++t)
  {
    const double y = (static_cast<double>(t) - 0.5 * static_cast<double>(spec.n_tx - 1)) * a.spacing;
    a.tx_positions.emplace_back(0.0, y, 0.0);
    a.tx_moments.push_back(moment);
  }
  for (std::size_t r = 0; r < spec.n_rx; ++r)
  {
    const double z = (static_cast<double>(r) - 0.5 * static_cast<double>(spec.n_rx - 1)) * a.spacing;
    a.rx_positions.emplace_back(0.0, 0.0, z);
    a.rx_polarizations.push_back(pol);
  }
  return a;
}

}  // namespace nfsim
