// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>
#include <string>

#include <doctest.h>

#include "core/array_geometry.hpp"
#include "core/channel_synth.hpp"
#include "core/error.hpp"
#include "core/scene.hpp"
#include "oracles.hpp"

using namespace nfsim;

namespace
{

ArrayGeometry Array(std::size_t n, double carrier)
{
  ArraySpec spec;
  spec.n_tx = n;
  spec.n_rx = n;
  spec.carrier_hz = carrier;
  return MakeCrossArray(spec);
}

// One eps_r = 3 voxel at the model origin.
TargetModel PointTarget(double pitch, Material m = Material{3.0, 0.0})
{
  TargetModel model;
  model.pitch = pitch;
  model.positions = {Vec3::Zero()};
  model.lattice_indices = {Eigen::Vector3i::Zero()};
  model.materials = {m};
  model.wheel_of = {-1};
  model.extent = Vec3::Constant(pitch);
  return model;
}

ScenarioConfig Scenario(double R0, double psi_deg, double v, std::size_t frames, double dt)
{
  ScenarioConfig cfg;
  cfg.R0 = R0;
  cfg.psi0_deg = psi_deg;
  cfg.v = v;
  cfg.azimuth_deg = 0.0;
  cfg.n_frames = frames;
  cfg.dt = dt;
  return cfg;
}

double Unwrap(double d)
{
  while (d > oracle::kPi)
  {
    d -= 2.0 * oracle::kPi;
  }
  while (d < -oracle::kPi)
  {
    d += 2.0 * oracle::kPi;
  }
  return d;
}

NoiseConfig Quiet()
{
  NoiseConfig n;
  n.enabled = false;
  return n;
}

}  // namespace

TEST_CASE("subcarrier plan")
{
  const SubcarrierPlan p = SubcarrierPlan::Full(4.9e9, 120e3, 64);
  CHECK(p.FrequencyOfGridIndex(0) == doctest::Approx(4.9e9 - 31.5 * 120e3));
  CHECK(p.FrequencyOfGridIndex(63) == doctest::Approx(4.9e9 + 31.5 * 120e3));
  const SubcarrierPlan s = p.Select({0, 16, 32, 48});
  CHECK(s.Count() == 4);
  CHECK(s.Frequencies()[2] == doctest::Approx(4.9e9 + 0.5 * 120e3));
  CHECK_THROWS_AS(p.Select({3, 3}), Error);
  CHECK_THROWS_AS(p.Select({64}), Error);
  CHECK_THROWS_AS(p.Select({}), Error);
}

TEST_CASE("receive matrix and channel assembly")
{
  const Wavenumber k = Wavenumber::FromFrequency(1e9);
  const ArrayGeometry array = Array(3, 1e9);
  ScattererSnapshot s = MakeCubeSnapshot(Vec3(2.0, 0.3, -0.2), 0.06, 2, Material{3.0, 0.01});
  SolverConfig cfg;

  SUBCASE("receive rows are polarization-projected Green dyads")
  {
    const Eigen::MatrixXcd b = ReceiveMatrix(s, array, k);
    REQUIRE(b.rows() == 3);
    REQUIRE(b.cols() == 24);
    for (std::size_t r = 0; r < 3; ++r)
    {
      for (std::size_t n = 0; n < s.NumVoxels(); ++n)
      {
        const oracle::M3 G = oracle::GreenDyadic(array.rx_positions[r] - s.centers[n], k.k0);
        const Eigen::RowVector3cd ref = array.rx_polarizations[r].cast<cdouble>().transpose() * G;
        const Eigen::RowVector3cd got = b.block<1, 3>(static_cast<Eigen::Index>(r), 3 * static_cast<Eigen::Index>(n));
        CHECK((got - ref).norm() <= 1e-12 * ref.norm());
      }
    }
  }
  SUBCASE("channel is the contrast-weighted sum over voxels")
  {
    const TransferMatrices t = SolveTransfer(s, array, k, cfg);
    const Eigen::MatrixXcd h = AssembleChannel(s, t, array, k);
    Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(3, 3);
    for (std::size_t n = 0; n < s.NumVoxels(); ++n)
    {
      const cdouble chi(2.0, -0.01 / (k.omega * oracle::kEps0));
      for (std::size_t r = 0; r < 3; ++r)
      {
        const oracle::M3 G = oracle::GreenDyadic(array.rx_positions[r] - s.centers[n], k.k0);
        const Eigen::RowVector3cd row = array.rx_polarizations[r].cast<cdouble>().transpose() * G;
        ref.row(static_cast<Eigen::Index>(r)) += k.k0 * k.k0 * s.delta_v * chi * (row * t.At(n));
      }
    }
    CHECK((h - ref).norm() <= 1e-12 * ref.norm());
  }
  SUBCASE("weak scatterer matches the Born channel")
  {
    ScattererSnapshot weak = MakeCubeSnapshot(Vec3(2.0, 0.3, -0.2), 0.06, 2, Material{1.0001});
    const TransferMatrices t = SolveTransfer(weak, array, k, cfg);
    const Eigen::MatrixXcd h = AssembleChannel(weak, t, array, k);
    Eigen::MatrixXcd born = Eigen::MatrixXcd::Zero(3, 3);
    for (std::size_t n = 0; n < weak.NumVoxels(); ++n)
    {
      for (std::size_t r = 0; r < 3; ++r)
      {
        for (std::size_t tx = 0; tx < 3; ++tx)
        {
          const oracle::CV3 inc = oracle::DipoleField(weak.centers[n], array.tx_positions[tx], array.tx_moments[tx], k.k0);
          const oracle::M3 G = oracle::GreenDyadic(array.rx_positions[r] - weak.centers[n], k.k0);
          const cdouble v = (array.rx_polarizations[r].cast<cdouble>().transpose() * G * inc)(0);
          born(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(tx)) += k.k0 * k.k0 * weak.delta_v * 1e-4 * v;
        }
      }
    }
    CHECK((h - born).norm() <= 1e-3 * born.norm());
  }
  SUBCASE("channel is reciprocal under swapping transmit and receive roles")
  {
    ArrayGeometry a = array;
    ArrayGeometry b = array;
    std::swap(b.tx_positions, b.rx_positions);
    for (std::size_t i = 0; i < 3; ++i)
    {
      a.tx_moments[i] = a.rx_polarizations[i].cast<cdouble>();
      b.tx_moments[i] = b.rx_polarizations[i].cast<cdouble>();
    }
    const Eigen::MatrixXcd ha = AssembleChannel(s, SolveTransfer(s, a, k, cfg), a, k);
    const Eigen::MatrixXcd hb = AssembleChannel(s, SolveTransfer(s, b, k, cfg), b, k);
    CHECK((ha - hb.transpose()).norm() <= 1e-8 * ha.norm());
  }
  SUBCASE("transfer matrices from another snapshot are rejected")
  {
    const TransferMatrices t = SolveTransfer(s, array, k, cfg);
    ScattererSnapshot moved = s;
    for (auto &c : moved.centers)
    {
      c.x() += 0.01;
    }
    CHECK_THROWS_AS(AssembleChannel(moved, t, array, k), Error);
    CHECK_THROWS_AS(AssembleChannel(s, t, array, Wavenumber::FromFrequency(1.01e9)), Error);
  }
  SUBCASE("voxel on an array element is a domain error")
  {
    ScattererSnapshot bad = MakeCubeSnapshot(array.rx_positions[1], 0.02, 1, Material{2.0});
    CHECK_THROWS_AS(ReceiveMatrix(bad, array, k), Error);
  }
}

TEST_CASE("noise")
{
  SUBCASE("receive adds circular noise of the requested variance")
  {
    const Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(40000, 1);
    const Eigen::VectorXcd x = Eigen::VectorXcd::Ones(1);
    const Eigen::VectorXcd y = Receive(h, x, 0.3, 99);
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
    {
      re += y(i).real() * y(i).real();
      im += y(i).imag() * y(i).imag();
    }
    const double n = static_cast<double>(y.size());
    CHECK((re + im) / n == doctest::Approx(0.09).epsilon(0.05));
    CHECK(re / n == doctest::Approx(0.045).epsilon(0.05));
    CHECK(Receive(h, x, 0.3, 99) == y);
    CHECK(Receive(h, x, 0.3, 100) != y);
    CHECK_THROWS_AS(Receive(h, Eigen::VectorXcd::Ones(2), 0.3, 1), Error);
  }
  SUBCASE("calibration scales with power")
  {
    NoiseConfig noise;
    CHECK(CalibrateNoise(noise, 2.5) == doctest::Approx(std::sqrt(2.5 / 100.0)));
    CHECK(CalibrateNoise(noise, 5.0) / CalibrateNoise(noise, 2.5) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(CalibrateNoise(noise, 0.0), Error);
  }
  SUBCASE("calibrated noise hits the target SNR on the reference target")
  {
    const ArrayGeometry array = Array(2, 150e6);
    const SubcarrierPlan plan = SubcarrierPlan::Full(150e6, 120e3, 64).Select({0, 32});
    NoiseConfig noise;
    const double p = CalibrationPower(array, plan, SolverConfig{}, noise, 0.2);
    CHECK(p > 0.0);
    const double sigma = CalibrateNoise(noise, p);
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(200, 100);
    AddComplexNoise(z, sigma, 5);
    const double snr = 10.0 * std::log10(p / (z.squaredNorm() / static_cast<double>(z.size())));
    CHECK(std::abs(snr - 20.0) <= 0.5);
  }
}

TEST_CASE("dwell stacking")
{
  std::vector<ChannelCell> cells;
  for (std::size_t k = 0; k < 3; ++k)
  {
    for (std::size_t m = 0; m < 2; ++m)
    {
      Eigen::MatrixXcd h(2, 4);
      for (Eigen::Index r = 0; r < 2; ++r)
      {
        for (Eigen::Index t = 0; t < 4; ++t)
        {
          h(r, t) = cdouble(static_cast<double>(1000 * k + 100 * m + 10 * static_cast<std::size_t>(r)) + static_cast<double>(t), 1.0);
        }
      }
      cells.push_back({k, m, h});
    }
  }
  std::mt19937_64 rng(3);
  std::shuffle(cells.begin(), cells.end(), rng);
  const ComplexTensor t = StackDwell(cells, 3, 2);
  CHECK(t.dims() == std::vector<std::size_t>{2, 4, 3, 2});
  for (const auto &c : cells)
  {
    CHECK(SliceDwell(t, c.k, c.m) == c.h);
  }
  CHECK(t(1, 3, 2, 1) == cdouble(2113.0, 1.0));

  std::vector<ChannelCell> missing = cells;
  const auto dropped = std::find_if(missing.begin(), missing.end(), [](const ChannelCell &c) { return c.k == 1 && c.m == 0; });
  missing.erase(dropped);
  try
  {
    StackDwell(missing, 3, 2);
    FAIL("expected an error");
  }
  catch (const Error &e)
  {
    CHECK(std::string(e.what()).find("k=1, m=0") != std::string::npos);
  }
  std::vector<ChannelCell> outside = cells;
  outside.push_back({3, 0, cells.front().h});
  CHECK_THROWS_AS(StackDwell(outside, 3, 2), Error);
}

TEST_CASE("simulated dwell")
{
  const double f0 = 1e9;
  const ArrayGeometry array = Array(2, f0);
  const SubcarrierPlan plan = SubcarrierPlan::Full(f0, 1e6, 8);
  const SolverConfig solver;
  const TargetModel point = PointTarget(0.03);

  SUBCASE("static target repeats across frames")
  {
    const DwellResult d = SimulateDwell(point, Scenario(20.0, 0.0, 0.0, 3, 0.01), array, plan, solver, Quiet(), 0.0);
    CHECK(d.tensor.dims() == std::vector<std::size_t>{2, 2, 8, 3});
    for (std::size_t k = 0; k < 8; ++k)
    {
      CHECK(SliceDwell(d.tensor, k, 1) == SliceDwell(d.tensor, k, 0));
      CHECK(SliceDwell(d.tensor, k, 2) == SliceDwell(d.tensor, k, 0));
    }
    CHECK(d.metadata.at("n_voxels") == 1);
    CHECK(d.metadata.at("noise").at("enabled") == false);
  }

  SUBCASE("phase advances linearly across subcarriers with the two-way path")
  {
    const ScenarioConfig sc = Scenario(20.0, 0.0, 0.0, 1, 0.01);
    const DwellResult d = SimulateDwell(point, sc, array, plan, solver, Quiet(), 0.0);
    const Vec3 target(20.0, 0.0, 0.0);
    const double path = (target - array.tx_positions[0]).norm() + (target - array.rx_positions[0]).norm();
    const double expected = -2.0 * oracle::kPi * path * plan.spacing_hz / oracle::kC;
    double slope = 0.0;
    for (std::size_t k = 1; k < 8; ++k)
    {
      slope += Unwrap(std::arg(d.tensor(0, 0, k, 0)) - std::arg(d.tensor(0, 0, k - 1, 0)));
    }
    slope /= 7.0;
    CHECK(std::abs(slope / expected - 1.0) <= 0.02);
  }

  SUBCASE("radial motion produces the Doppler phase step")
  {
    const ScenarioConfig sc = Scenario(20.0, 180.0, 10.0, 4, 0.002);
    const DwellResult d = SimulateDwell(point, sc, array, plan.Select({3}), solver, Quiet(), 0.0);
    const double k0 = oracle::K0(plan.FrequencyOfGridIndex(3));
    for (std::size_t m = 1; m < 4; ++m)
    {
      const Vec3 p0(20.0 - 10.0 * 0.002 * static_cast<double>(m - 1), 0.0, 0.0);
      const Vec3 p1(20.0 - 10.0 * 0.002 * static_cast<double>(m), 0.0, 0.0);
      const double d0 = (p0 - array.tx_positions[1]).norm() + (p0 - array.rx_positions[0]).norm();
      const double d1 = (p1 - array.tx_positions[1]).norm() + (p1 - array.rx_positions[0]).norm();
      const double expected = Unwrap(-k0 * (d1 - d0));
      const double step = Unwrap(std::arg(d.tensor(0, 1, 0, m)) - std::arg(d.tensor(0, 1, 0, m - 1)));
      CHECK(std::abs(step / expected - 1.0) <= 0.05);
    }
  }

  SUBCASE("zero contrast gives an exactly zero channel")
  {
    const DwellResult d =
        SimulateDwell(PointTarget(0.03, Material{}), Scenario(20.0, 30.0, 5.0, 2, 0.01), array, plan, solver, Quiet(), 0.0);
    CHECK(std::all_of(d.tensor.data().begin(), d.tensor.data().end(), [](cdouble v) { return v == 0.0; }));
  }

  SUBCASE("noisy dwells are deterministic in the seed")
  {
    NoiseConfig noise;
    noise.rng_seed = 77;
    const ScenarioConfig sc = Scenario(20.0, 30.0, 5.0, 2, 0.01);
    const DwellResult a = SimulateDwell(point, sc, array, plan, solver, noise, 1e-9);
    const DwellResult b = SimulateDwell(point, sc, array, plan, solver, noise, 1e-9);
    CHECK(a.tensor == b.tensor);
    noise.rng_seed = 78;
    const DwellResult c = SimulateDwell(point, sc, array, plan, solver, noise, 1e-9);
    CHECK_FALSE(a.tensor == c.tensor);
    CHECK(a.metadata.at("noise").at("sigma_h") == 1e-9);
  }

  SUBCASE("the channel is linear in the transmit moment")
  {
    ArraySpec spec;
    spec.n_tx = 2;
    spec.n_rx = 2;
    spec.carrier_hz = f0;
    spec.tx_moment_magnitude = 2.5;
    const ArrayGeometry strong = MakeCrossArray(spec);
    const ScenarioConfig sc = Scenario(20.0, 30.0, 5.0, 2, 0.01);
    const DwellResult a = SimulateDwell(point, sc, array, plan, solver, Quiet(), 0.0);
    const DwellResult b = SimulateDwell(point, sc, strong, plan, solver, Quiet(), 0.0);
    for (std::size_t i = 0; i < a.tensor.size(); ++i)
    {
      REQUIRE(std::abs(b.tensor.data()[i] - 2.5 * a.tensor.data()[i]) <= 1e-12 * std::abs(b.tensor.data()[i]));
    }
  }

  SUBCASE("solver failures name the subcarrier and frame")
  {
    TargetModel cube;
    cube.pitch = 0.03;
    const Material metal{1.0, 1e6, PartTag::Body, 50.0};
    for (int i = 0; i < 3; ++i)
    {
      for (int j = 0; j < 3; ++j)
      {
        cube.positions.push_back(0.03 * Vec3(i, j, 0));
        cube.lattice_indices.emplace_back(i, j, 0);
        cube.materials.push_back(metal);
        cube.wheel_of.push_back(-1);
      }
    }
    SolverConfig tight;
    tight.mode = SolverMode::IterativeDense;
    tight.tolerance = 1e-10;
    tight.max_iterations = 1;
    try
    {
      SimulateDwell(cube, Scenario(20.0, 0.0, 0.0, 1, 0.01), array, plan.Select({2}), tight, Quiet(), 0.0);
      FAIL("expected an error");
    }
    catch (const Error &e)
    {
      CHECK(e.code() == ErrorCode::NotConverged);
      CHECK(std::string(e.what()).find("subcarrier 2, frame 0") != std::string::npos);
    }
  }

  SUBCASE("scenario metadata round trips")
  {
    const ScenarioConfig sc = SampleScenario(5, 4, 0.01);
    const ScenarioConfig back = ScenarioFromJson(ScenarioToJson(sc));
    CHECK(back.R0 == sc.R0);
    CHECK(back.psi0_deg == sc.psi0_deg);
    CHECK(back.v == sc.v);
    CHECK(back.azimuth_deg == sc.azimuth_deg);
    CHECK(back.rng_seed == sc.rng_seed);
  }
}
