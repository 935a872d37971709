// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Core>

namespace nfsim
{

using cdouble = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Dyad = Eigen::Matrix3cd;

// SI values. c is exact; eps0 is derived so that c = 1/sqrt(mu0 eps0) holds to rounding.
namespace constants
{
inline constexpr double c0 = 299792458.0;
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);
}  // namespace constants

// Time dependence is e^{+j w t}; outgoing spherical waves carry e^{-j k0 R}. Every
// sign downstream (radiative self-term, Doppler direction, delay phase) follows from it.
inline constexpr cdouble kJ{0.0, 1.0};

struct Wavenumber
{
  double f = 0.0;      // Hz
  double omega = 0.0;  // rad/s
  double k0 = 0.0;     // rad/m

  static Wavenumber FromFrequency(double f_hz);
  double Wavelength() const { return 2.0 * std::numbers::pi / k0; }
};

struct ArrayGeometry;

cdouble ScalarGreen(double R, const Wavenumber &k);

// Free-space dyadic Green's function (I + grad grad^T / k0^2) g(|d|) for displacement
// d = r - r_src, evaluated from its closed radial form. Symmetric in its indices.
Dyad DyadicGreenDisplacement(const Vec3 &d, const Wavenumber &k);
Dyad DyadicGreen(const Vec3 &r, const Vec3 &r_src, const Wavenumber &k);

// Field of a small electric dipole including the 1/R^2 and 1/R^3 reactive terms.
CVec3 DipoleField(const Vec3 &r, const Vec3 &r_src, const CVec3 &p, const Wavenumber &k);

// 3 x N_t incident-field matrix: column t is the field of transmit element t.
Eigen::MatrixXcd IncidentMatrix(const Vec3 &r, const ArrayGeometry &array, const Wavenumber &k);

}  // namespace nfsim
