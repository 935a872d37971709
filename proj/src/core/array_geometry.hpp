// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "core/em_kernels.hpp"

namespace nfsim
{

// Cross-shaped aperture: transmit ULA along y, receive ULA along z, both centered on the
// origin with half-wavelength spacing at the carrier. Boresight is +x.
struct ArrayGeometry
{
  std::vector<Vec3> tx_positions;
  std::vector<Vec3> rx_positions;
  std::vector<CVec3> tx_moments;        // C m
  std::vector<Vec3> rx_polarizations;   // unit vectors
  double lambda_c = 0.0;
  double spacing = 0.0;

  std::size_t NumTx() const { return tx_positions.size(); }
  std::size_t NumRx() const { return rx_positions.size(); }

  void Validate() const;
};

struct ArraySpec
{
  std::size_t n_tx = 8;
  std::size_t n_rx = 8;
  double carrier_hz = 4.9e9;
  Vec3 tx_moment_axis = Vec3::UnitZ();
  double tx_moment_magnitude = 1.0;  // C m
  Vec3 rx_polarization = Vec3::UnitZ();
};

ArrayGeometry MakeCrossArray(const ArraySpec &spec);

}  // namespace nfsim
