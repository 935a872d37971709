// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/em_kernels.hpp"

#include <cmath>
#include <sstream>

#include "core/array_geometry.hpp"
#include "core/error.hpp"

namespace nfsim
{

namespace
{

void CheckSeparation(double R, const char *what)
{
  if (!(R > 0.0) || !std::isfinite(R))
  {
    std::ostringstream msg;
    msg << what << ": source and observation points coincide (R = " << R << ")";
    Fail(ErrorCode::Domain, msg.str());
  }
}

}  // namespace

Wavenumber Wavenumber::FromFrequency(double f_hz)
{
  if (!(f_hz > 0.0) || !std::isfinite(f_hz))
  {
    Fail(ErrorCode::InvalidArgument, "frequency must be positive and finite");
  }
  Wavenumber k;
  k.f = f_hz;
  k.omega = 2.0 * std::numbers::pi * f_hz;
  k.k0 = k.omega * std::sqrt(constants::mu0 * constants::eps0);
  return k;
}

cdouble ScalarGreen(double R, const Wavenumber &k)
{
  CheckSeparation(R, "scalar_green");
  return std::exp(-kJ * (k.k0 * R)) / (4.0 * std::numbers::pi * R);
}

Dyad DyadicGreenDisplacement(const Vec3 &d, const Wavenumber &k)
{
  const double R = d.norm();
  CheckSeparation(R, "dyadic_green");
  const Vec3 rhat = d / R;
  const double inv = 1.0 / (k.k0 * R);
  const cdouble g = std::exp(-kJ * (k.k0 * R)) / (4.0 * std::numbers::pi * R);
  // Transverse and longitudinal radial coefficients of (I + grad grad / k0^2) g.
  const cdouble a = g * cdouble(1.0 - inv * inv, -inv);
  const cdouble b = g * cdouble(-1.0 + 3.0 * inv * inv, 3.0 * inv);
  Dyad G = b * (rhat * rhat.transpose()).cast<cdouble>();
  G.diagonal().array() += a;
  return G;
}

Dyad DyadicGreen(const Vec3 &r, const Vec3 &r_src, const Wavenumber &k)
{
  return DyadicGreenDisplacement(r - r_src, k);
}

CVec3 DipoleField(const Vec3 &r, const Vec3 &r_src, const CVec3 &p, const Wavenumber &k)
{
  const Vec3 d = r - r_src;
  const double R = d.norm();
  CheckSeparation(R, "dipole_field");
  const CVec3 rhat = (d / R).cast<cdouble>();
  const double k0 = k.k0;
  const cdouble rp = rhat.dot(p);  // Eigen's dot conjugates the left side; rhat is real
  const CVec3 transverse = p - rhat * rp;  // (rhat x p) x rhat
  const CVec3 quasi_static = 3.0 * rhat * rp - p;
  const cdouble reactive(1.0 / (R * R * R), k0 / (R * R));
  const cdouble prefactor = std::exp(-kJ * (k0 * R)) / (4.0 * std::numbers::pi * constants::eps0);
  return prefactor * ((k0 * k0 / R) * transverse + reactive * quasi_static);
}

Eigen::MatrixXcd IncidentMatrix(const Vec3 &r, const ArrayGeometry &array, const Wavenumber &k)
{
  Eigen::MatrixXcd A(3, static_cast<Eigen::Index>(array.NumTx()));
  for (std::size_t t = 0; t < array.NumTx(); ++t)
  {
    A.col(static_cast<Eigen::Index>(t)) = DipoleField(r, array.tx_positions[t], array.tx_moments[t], k);
  }
  return A;
}

}  // namespace nfsim
