// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <string>

#include <doctest.h>

#include <Eigen/Geometry>

#include "core/array_geometry.hpp"
#include "core/error.hpp"
#include "core/scene.hpp"
#include "core/vie_solver.hpp"
#include "oracles.hpp"

using namespace nfsim;

namespace
{

const Wavenumber kGHz = Wavenumber::FromFrequency(1e9);

Eigen::VectorXcd RandomVector(Eigen::Index n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    v(i) = cdouble(g(rng), g(rng));
  }
  return v;
}

ScattererSnapshot RandomContrastCube(std::size_t cells, double side, std::uint64_t seed)
{
  ScattererSnapshot s = MakeCubeSnapshot(Vec3(3.0, 0.2, -0.1), side, cells, Material{});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eps(1.5, 4.0);
  std::uniform_real_distribution<double> sig(0.0, 0.05);
  for (auto &m : s.materials)
  {
    m = Material{eps(rng), sig(rng)};
  }
  return s;
}

Eigen::VectorXcd Contrasts(const ScattererSnapshot &s, const Wavenumber &k)
{
  Eigen::VectorXcd chi(static_cast<Eigen::Index>(s.NumVoxels()));
  for (std::size_t n = 0; n < s.NumVoxels(); ++n)
  {
    chi(static_cast<Eigen::Index>(n)) = ContrastAt(s.materials[n], k);
  }
  return chi;
}

ArrayGeometry SmallArray(double carrier)
{
  ArraySpec spec;
  spec.n_tx = 3;
  spec.n_rx = 3;
  spec.carrier_hz = carrier;
  return MakeCrossArray(spec);
}

}  // namespace

TEST_CASE("self coefficient")
{
  const double dv = 1e-6;
  CHECK(SelfCoefficient(kGHz, dv, SelfTerm::StaticOnly) == cdouble(-1.0 / 3.0, 0.0));
  const cdouble c = SelfCoefficient(kGHz, dv, SelfTerm::StaticPlusRadiative);
  CHECK(c.real() == doctest::Approx(-1.0 / 3.0));
  CHECK(c.imag() == doctest::Approx(-std::pow(kGHz.k0, 3) * dv / (6.0 * oracle::kPi)).epsilon(1e-12));
  CHECK(SelfCoefficient(kGHz, dv, SelfTerm::StaticOnly, true) == cdouble(1.0 / 3.0, 0.0));
}

TEST_CASE("dense interaction operator")
{
  SolverConfig cfg;
  SUBCASE("identity when the contrast vanishes")
  {
    const ScattererSnapshot s = MakeCubeSnapshot(Vec3(2, 0, 0), 0.09, 3, Material{});
    const auto op = AssembleInteraction(s, kGHz, cfg);
    CHECK((op->Matrix() - Eigen::MatrixXcd::Identity(81, 81)).norm() == 0.0);
  }
  SUBCASE("two-voxel blocks")
  {
    ScattererSnapshot s;
    s.centers = {Vec3(1.0, 0.0, 0.0), Vec3(1.02, 0.01, -0.015)};
    s.delta_v = 1e-6;
    s.materials = {Material{2.0, 0.01}, Material{4.0, 0.0}};
    const auto op = AssembleInteraction(s, kGHz, cfg);
    const Eigen::MatrixXcd &A = op->Matrix();
    const Eigen::VectorXcd chi = Contrasts(s, kGHz);
    const oracle::M3 G = oracle::GreenDyadic(s.centers[0] - s.centers[1], kGHz.k0);
    const double scale = kGHz.k0 * kGHz.k0 * s.delta_v;
    CHECK((A.block<3, 3>(0, 3) - (-scale * G * chi(1))).norm() <= 1e-12 * A.block<3, 3>(0, 3).norm());
    CHECK((A.block<3, 3>(3, 0) - (-scale * G * chi(0))).norm() <= 1e-12 * A.block<3, 3>(3, 0).norm());
    const cdouble c = SelfCoefficient(kGHz, s.delta_v, cfg.self_term);
    for (int n = 0; n < 2; ++n)
    {
      const Eigen::Matrix3cd diag = A.block<3, 3>(3 * n, 3 * n);
      CHECK((diag - (1.0 - c * chi(n)) * Eigen::Matrix3cd::Identity()).norm() < 1e-15);
    }
  }
  SUBCASE("matches a triple-loop matvec")
  {
    const ScattererSnapshot s = RandomContrastCube(3, 0.09, 11);
    const auto op = AssembleInteraction(s, kGHz, cfg);
    const Eigen::VectorXcd x = RandomVector(81, 12);
    const Eigen::VectorXcd ref = oracle::InteractionMatvec(s.centers, Contrasts(s, kGHz), s.delta_v, kGHz.k0,
                                                           SelfCoefficient(kGHz, s.delta_v, cfg.self_term), x);
    CHECK((op->Apply(x) - ref).norm() <= 1e-12 * ref.norm());
  }
  SUBCASE("duplicate centers are rejected")
  {
    ScattererSnapshot s = MakeCubeSnapshot(Vec3(2, 0, 0), 0.06, 2, Material{2.0});
    s.centers[5] = s.centers[2];
    s.lattice.reset();
    try
    {
      AssembleInteraction(s, kGHz, cfg);
      FAIL("expected an error");
    }
    catch (const Error &e)
    {
      CHECK(e.code() == ErrorCode::InvalidArgument);
      CHECK(std::string(e.what()).find("2 and 5") != std::string::npos);
    }
  }
}

TEST_CASE("lattice-accelerated matvec")
{
  SolverConfig cfg;
  auto compare = [&](const ScattererSnapshot &s, std::uint64_t seed) {
    const auto dense = AssembleInteraction(s, kGHz, cfg);
    const Eigen::VectorXcd x = RandomVector(3 * static_cast<Eigen::Index>(s.NumVoxels()), seed);
    const Eigen::VectorXcd ref = dense->Apply(x);
    const Eigen::VectorXcd fast = FastMatvec(s, x, kGHz, cfg);
    return (fast - ref).norm() / ref.norm();
  };
  SUBCASE("4x4x4 cube")
  {
    CHECK(compare(RandomContrastCube(4, 0.12, 21), 22) <= 1e-10);
  }
  SUBCASE("single voxel")
  {
    CHECK(compare(RandomContrastCube(1, 0.02, 23), 24) <= 1e-12);
  }
  SUBCASE("masked lattice")
  {
    ScattererSnapshot s = RandomContrastCube(4, 0.12, 25);
    ScattererSnapshot masked = s;
    masked.centers.clear();
    masked.materials.clear();
    masked.lattice->indices.clear();
    for (std::size_t n = 0; n < s.NumVoxels(); ++n)
    {
      if (n % 3 != 1)
      {
        masked.centers.push_back(s.centers[n]);
        masked.materials.push_back(s.materials[n]);
        masked.lattice->indices.push_back(s.lattice->indices[n]);
      }
    }
    CHECK(compare(masked, 26) <= 1e-10);
  }
  SUBCASE("rotated lattice")
  {
    ScattererSnapshot s = RandomContrastCube(3, 0.09, 27);
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(0.7, Vec3(0.2, 0.3, 1.0).normalized()).toRotationMatrix();
    s.lattice->rotation = rot;
    for (std::size_t n = 0; n < s.NumVoxels(); ++n)
    {
      s.centers[n] = s.lattice->origin + s.lattice->pitch * (rot * s.lattice->indices[n].cast<double>());
    }
    CHECK(compare(s, 28) <= 1e-10);
  }
  SUBCASE("voxels off the lattice are rejected")
  {
    ScattererSnapshot s = RandomContrastCube(3, 0.09, 29);
    s.centers[4].y() += 0.01;
    CHECK_THROWS_AS(FastMatvec(s, RandomVector(81, 1), kGHz, cfg), Error);
    s.lattice.reset();
    CHECK_THROWS_AS(FastMatvec(s, RandomVector(81, 1), kGHz, cfg), Error);
  }
}

TEST_CASE("solving the volume integral equation")
{
  const ArrayGeometry array = SmallArray(1e9);
  SUBCASE("single voxel closed form")
  {
    SolverConfig cfg;
    const ScattererSnapshot s = MakeCubeSnapshot(Vec3(2.0, 0.1, 0.3), 0.02, 1, Material{3.0, 0.02});
    const TransferMatrices t = SolveTransfer(s, array, kGHz, cfg);
    const cdouble chi = ContrastAt(s.materials[0], kGHz);
    const cdouble c = SelfCoefficient(kGHz, s.delta_v, cfg.self_term);
    const Eigen::MatrixXcd expected = IncidentMatrix(s.centers[0], array, kGHz) / (1.0 - c * chi);
    CHECK((t.At(0) - expected).norm() <= 1e-12 * expected.norm());
  }
  SUBCASE("weak scatterer follows the first-order Born series")
  {
    SolverConfig cfg;
    ScattererSnapshot s = MakeCubeSnapshot(Vec3(2.0, 0.0, 0.0), 0.09, 3, Material{1.0001});
    const TransferMatrices t = SolveTransfer(s, array, kGHz, cfg);
    const Eigen::MatrixXcd inc = IncidentFields(s.centers, array, kGHz);
    const Eigen::VectorXcd chi = Contrasts(s, kGHz);
    const cdouble c = SelfCoefficient(kGHz, s.delta_v, cfg.self_term);
    Eigen::MatrixXcd born(inc.rows(), inc.cols());
    for (Eigen::Index col = 0; col < inc.cols(); ++col)
    {
      // (I - K) E_inc from the oracle gives K E_inc; first order is E_inc + K E_inc.
      const Eigen::VectorXcd applied = oracle::InteractionMatvec(s.centers, chi, s.delta_v, kGHz.k0, c, inc.col(col));
      born.col(col) = 2.0 * inc.col(col) - applied;
    }
    const double scattered = (t.fields - inc).norm();
    CHECK(scattered > 0.0);
    CHECK((t.fields - born).norm() <= 1e-3 * scattered);
  }
  SUBCASE("iterative modes agree with the direct solve")
  {
    const ScattererSnapshot s = RandomContrastCube(4, 0.12, 31);
    SolverConfig direct;
    direct.mode = SolverMode::DenseDirect;
    const TransferMatrices ref = SolveTransfer(s, array, kGHz, direct);
    CHECK(ref.mode_used == SolverMode::DenseDirect);
    for (SolverMode mode : {SolverMode::IterativeDense, SolverMode::IterativeFft})
    {
      SolverConfig cfg;
      cfg.mode = mode;
      cfg.tolerance = 1e-8;
      const TransferMatrices t = SolveTransfer(s, array, kGHz, cfg);
      CHECK(t.mode_used == mode);
      CHECK(t.iterations > 1);
      CHECK((t.fields - ref.fields).norm() / ref.fields.norm() <= 10.0 * cfg.tolerance);
      CHECK(t.residual <= cfg.tolerance);
      // Independent residual through the oracle matvec.
      const Eigen::MatrixXcd inc = IncidentFields(s.centers, array, kGHz);
      const Eigen::VectorXcd chi = Contrasts(s, kGHz);
      const cdouble c = SelfCoefficient(kGHz, s.delta_v, cfg.self_term);
      double worst = 0.0;
      for (Eigen::Index col = 0; col < inc.cols(); ++col)
      {
        const Eigen::VectorXcd r =
            inc.col(col) - oracle::InteractionMatvec(s.centers, chi, s.delta_v, kGHz.k0, c, t.fields.col(col));
        worst = std::max(worst, r.norm() / inc.col(col).norm());
      }
      CHECK(worst <= 2.0 * std::max(t.residual, 1e-14));
    }
  }
  SUBCASE("auto picks the direct solver for small systems")
  {
    const ScattererSnapshot s = RandomContrastCube(2, 0.06, 32);
    SolverConfig cfg;
    CHECK(SolveTransfer(s, array, kGHz, cfg).mode_used == SolverMode::DenseDirect);
    cfg.auto_dense_limit = 4;
    CHECK(SolveTransfer(s, array, kGHz, cfg).mode_used == SolverMode::IterativeFft);
  }
  SUBCASE("zero contrast returns the incident field exactly")
  {
    const ScattererSnapshot s = MakeCubeSnapshot(Vec3(2.0, 0.0, 0.0), 0.09, 3, Material{});
    const TransferMatrices t = SolveTransfer(s, array, kGHz, SolverConfig{});
    CHECK((t.fields - IncidentFields(s.centers, array, kGHz)).norm() == 0.0);
  }
  SUBCASE("iteration cap reports non-convergence")
  {
    ScattererSnapshot s = MakeCubeSnapshot(Vec3(2.0, 0.0, 0.0), 0.09, 3, Material{1.0, 1e6, PartTag::Body, 50.0});
    SolverConfig cfg;
    cfg.mode = SolverMode::IterativeDense;
    cfg.tolerance = 1e-10;
    cfg.max_iterations = 1;
    try
    {
      SolveTransfer(s, array, kGHz, cfg);
      FAIL("expected an error");
    }
    catch (const Error &e)
    {
      CHECK(e.code() == ErrorCode::NotConverged);
      CHECK(std::string(e.what()).find("residual") != std::string::npos);
    }
  }
  SUBCASE("vanishing self-term diagonal is singular")
  {
    SolverConfig cfg;
    cfg.self_term = SelfTerm::StaticOnly;
    Eigen::VectorXcd chi(1);
    chi(0) = -3.0;
    const VoxelSystem sys = MakeVoxelSystem({Vec3(1, 0, 0)}, 1e-6, chi, std::nullopt, kGHz, cfg);
    const Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Ones(3, 1);
    for (SolverMode mode : {SolverMode::DenseDirect, SolverMode::IterativeDense})
    {
      cfg.mode = mode;
      try
      {
        SolveSystem(sys, rhs, cfg);
        FAIL("expected an error");
      }
      catch (const Error &e)
      {
        CHECK(e.code() == ErrorCode::Singular);
      }
    }
  }
}

TEST_CASE("scattered field")
{
  const ArrayGeometry array = SmallArray(1e9);
  const ScattererSnapshot s = MakeCubeSnapshot(Vec3(2.0, 0.1, 0.3), 0.02, 1, Material{3.0, 0.02});
  const TransferMatrices t = SolveTransfer(s, array, kGHz, SolverConfig{});
  const Eigen::VectorXcd x = RandomVector(3, 41);
  const Vec3 obs(0.5, -0.2, 0.1);
  const CVec3 es = ScatteredField(s, t, x, obs, kGHz);
  const cdouble chi = ContrastAt(s.materials[0], kGHz);
  const oracle::CV3 ref = kGHz.k0 * kGHz.k0 * s.delta_v *
                          (oracle::GreenDyadic(obs - s.centers[0], kGHz.k0) * (chi * (t.At(0) * x)));
  CHECK((es - ref).norm() <= 1e-12 * ref.norm());

  CHECK_THROWS_AS(ScatteredField(s, t, x, s.centers[0] + Vec3(0.005, 0, 0), kGHz), Error);
  CHECK_THROWS_AS(ScatteredField(s, t, RandomVector(2, 1), obs, kGHz), Error);

  const ScattererSnapshot empty = MakeCubeSnapshot(Vec3(2.0, 0.1, 0.3), 0.02, 1, Material{});
  const TransferMatrices t0 = SolveTransfer(empty, array, kGHz, SolverConfig{});
  CHECK(ScatteredField(empty, t0, x, obs, kGHz).norm() == 0.0);
}

TEST_CASE("solver configuration")
{
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  cfg.tolerance = 0.5;
  CHECK_THROWS_AS(cfg.Validate(), Error);
  cfg = SolverConfig{};
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.Validate(), Error);
  CHECK(SolverModeFromString("iterative_fft") == SolverMode::IterativeFft);
  CHECK(ToString(SolverMode::DenseDirect) == "dense_direct");
  CHECK_THROWS_AS(SolverModeFromString("cg"), Error);
  CHECK(SelfTermFromString("static_only") == SelfTerm::StaticOnly);

  SUBCASE("voxels larger than the wavelength limit are rejected")
  {
    SolverConfig limit;
    const ScattererSnapshot coarse = MakeCubeSnapshot(Vec3(2, 0, 0), 0.1, 1, Material{2.0});
    try
    {
      AssembleInteraction(coarse, kGHz, limit);
      FAIL("expected an error");
    }
    catch (const Error &e)
    {
      CHECK(std::string(e.what()).find("wavelengths") != std::string::npos);
    }
    limit.max_side_wavelengths = 0.0;
    CHECK_NOTHROW(AssembleInteraction(coarse, kGHz, limit));
  }
}
