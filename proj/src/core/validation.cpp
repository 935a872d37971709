// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/validation.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "core/channel_synth.hpp"
#include "core/dataset_io.hpp"
#include "core/features.hpp"
#include "core/vie_solver.hpp"

namespace nfsim
{

namespace
{

using Clock = std::chrono::steady_clock;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CheckResult Timed(const std::string &name, double bound, const std::function<double()> &measure,
                  const std::function<bool(double, double)> &accept = {})
{
  const auto t0 = Clock::now();
  CheckResult r;
  r.name = name;
  r.bound = bound;
  try
  {
    r.measured = measure();
    r.pass = accept ? accept(r.measured, bound) : (r.measured <= bound);
  }
  catch (const std::exception &)
  {
    r.measured = std::numeric_limits<double>::infinity();
    r.pass = false;
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

Vec3 RandomPoint(std::mt19937_64 &rng, double half)
{
  std::uniform_real_distribution<double> u(-half, half);
  return {u(rng), u(rng), u(rng)};
}

Material Dielectric(double eps_r, double sigma = 0.0)
{
  return Material{eps_r, sigma, PartTag::Body, 0.0};
}

// First n cells (lexicographic) of the smallest cube lattice that holds them.
ScattererSnapshot LatticeBlock(std::size_t n, double pitch, const Vec3 &center, const Material &material)
{
  const auto side = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
  ScattererSnapshot s = MakeCubeSnapshot(center, pitch * static_cast<double>(side), side, material);
  s.centers.resize(n);
  s.materials.resize(n);
  s.lattice->indices.resize(n);
  return s;
}

// Single-voxel target model for the scenario-driven phase checks.
TargetModel PointTarget(double side, const Material &material)
{
  TargetModel m;
  m.pitch = side;
  m.positions = {Vec3::Zero()};
  m.lattice_indices = {Eigen::Vector3i::Zero()};
  m.materials = {material};
  m.wheel_of = {-1};
  m.extent = Vec3::Constant(side);
  return m;
}

SolverConfig PhaseSolver(bool flip)
{
  SolverConfig cfg;
  cfg.mode = SolverMode::DenseDirect;
  cfg.self_term = SelfTerm::StaticOnly;
  cfg.fault_flip_self_term = flip;
  return cfg;
}

NoiseConfig Quiet()
{
  NoiseConfig n;
  n.enabled = false;
  return n;
}

double DipoleConsistency(std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(1e8, 1e10);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i)
  {
    const Wavenumber k = Wavenumber::FromFrequency(freq(rng));
    Vec3 r;
    Vec3 s;
    do
    {
      r = RandomPoint(rng, 2.0);
      s = RandomPoint(rng, 2.0);
    } while ((r - s).norm() < 1e-3);
    const CVec3 p(cdouble(gauss(rng), gauss(rng)), cdouble(gauss(rng), gauss(rng)), cdouble(gauss(rng), gauss(rng)));
    const CVec3 e = DipoleField(r, s, p, k);
    const CVec3 g = (k.k0 * k.k0 / constants::eps0) * (DyadicGreen(r, s, k) * p);
    worst = std::max(worst, (e - g).norm() / e.norm());
  }
  return worst;
}

double Reciprocity(std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(1e8, 1e10);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i)
  {
    const Wavenumber k = Wavenumber::FromFrequency(freq(rng));
    Vec3 r;
    Vec3 s;
    do
    {
      r = RandomPoint(rng, 2.0);
      s = RandomPoint(rng, 2.0);
    } while ((r - s).norm() < 1e-3);
    const Dyad a = DyadicGreen(r, s, k);
    const Dyad b = DyadicGreen(s, r, k);
    worst = std::max(worst, (a - b.transpose()).norm() / a.norm());
  }
  return worst;
}

double ZeroContrast(bool flip)
{
  ArraySpec spec;
  const ArrayGeometry array = MakeCrossArray(spec);
  const Wavenumber k = Wavenumber::FromFrequency(spec.carrier_hz);
  const ScattererSnapshot cube = MakeCubeSnapshot(Vec3(3.0, 0.2, -0.1), 0.015, 3, Dielectric(1.0));
  SolverConfig cfg;
  cfg.fault_flip_self_term = flip;
  const TransferMatrices t = SolveTransfer(cube, array, k, cfg);
  const Eigen::MatrixXcd inc = IncidentFields(cube.centers, array, k);
  const Eigen::MatrixXcd h = AssembleChannel(cube, t, array, k);
  return (t.fields - inc).cwiseAbs().maxCoeff() + h.cwiseAbs().maxCoeff();
}

double ClausiusMossotti(bool flip)
{
  const Wavenumber k = Wavenumber::FromFrequency(4.9e9);
  const double side = 0.05 / k.k0;
  const double dv = side * side * side;
  SolverConfig cfg = PhaseSolver(flip);
  double worst = 0.0;
  for (double eps_r : {2.0, 3.0, 5.0})
  {
    Eigen::VectorXcd chi(1);
    chi(0) = eps_r - 1.0;
    const VoxelSystem sys = MakeVoxelSystem({Vec3(1.0, 0.0, 0.0)}, dv, chi, std::nullopt, k, cfg);
    const SolveOutput out = SolveSystem(sys, Eigen::MatrixXcd::Identity(3, 3), cfg);
    const Eigen::Matrix3cd alpha = constants::eps0 * dv * chi(0) * out.x;
    const double expected = 3.0 * constants::eps0 * dv * (eps_r - 1.0) / (eps_r + 2.0);
    const Eigen::Matrix3cd diff = alpha - expected * Eigen::Matrix3cd::Identity();
    worst = std::max(worst, diff.cwiseAbs().maxCoeff() / expected);
  }
  return worst;
}

double BornSlope(bool flip)
{
  ArraySpec spec;
  const ArrayGeometry array = MakeCrossArray(spec);
  const Wavenumber k = Wavenumber::FromFrequency(spec.carrier_hz);
  SolverConfig cfg;
  cfg.mode = SolverMode::DenseDirect;
  cfg.fault_flip_self_term = flip;
  std::vector<double> lx;
  std::vector<double> ly;
  for (double chi : {1e-3, 1e-2, 1e-1})
  {
    const ScattererSnapshot cube =
        MakeCubeSnapshot(Vec3(2.0, 0.1, 0.05), 3.0 * k.Wavelength() / 10.0, 3, Dielectric(1.0 + chi));
    const TransferMatrices t = SolveTransfer(cube, array, k, cfg);
    const Eigen::MatrixXcd inc = IncidentFields(cube.centers, array, k);
    lx.push_back(std::log(chi));
    ly.push_back(std::log((t.fields - inc).norm() / inc.norm()));
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3.0;
  const double my = (ly[0] + ly[1] + ly[2]) / 3.0;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int i = 0; i < 3; ++i)
  {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return std::abs(sxy / sxx - 1.0);
}

ScattererSnapshot EquivalenceCube(const Wavenumber &k)
{
  return MakeCubeSnapshot(Vec3(1.5, -0.2, 0.1), 5.0 * k.Wavelength() / 10.0, 5, Dielectric(3.0, 0.05));
}

double MatvecEquivalence(std::uint64_t seed, bool flip)
{
  const Wavenumber k = Wavenumber::FromFrequency(4.9e9);
  const ScattererSnapshot cube = EquivalenceCube(k);
  SolverConfig cfg;
  cfg.fault_flip_self_term = flip;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd x(3 * static_cast<Eigen::Index>(cube.NumVoxels()));
  for (Eigen::Index i = 0; i < x.size(); ++i)
  {
    x(i) = {g(rng), g(rng)};
  }
  const Eigen::VectorXcd fast = FastMatvec(cube, x, k, cfg);
  const Eigen::VectorXcd dense = AssembleInteraction(cube, k, cfg)->Apply(x);
  return (fast - dense).norm() / dense.norm();
}

double SolveEquivalence(bool flip)
{
  ArraySpec spec;
  const ArrayGeometry array = MakeCrossArray(spec);
  const Wavenumber k = Wavenumber::FromFrequency(spec.carrier_hz);
  const ScattererSnapshot cube = EquivalenceCube(k);
  SolverConfig direct;
  direct.mode = SolverMode::DenseDirect;
  direct.fault_flip_self_term = flip;
  SolverConfig iterative = direct;
  iterative.mode = SolverMode::IterativeFft;
  iterative.tolerance = 1e-9;
  const TransferMatrices a = SolveTransfer(cube, array, k, direct);
  const TransferMatrices b = SolveTransfer(cube, array, k, iterative);
  return (a.fields - b.fields).norm() / a.fields.norm();
}

double SubcarrierSlope(bool flip)
{
  ArraySpec spec;
  const ArrayGeometry array = MakeCrossArray(spec);
  const double df = 120e3;
  const SubcarrierPlan plan = SubcarrierPlan::Full(spec.carrier_hz, df, 16);
  const TargetModel point = PointTarget(0.005, Dielectric(3.0));
  ScenarioConfig sc;
  sc.R0 = 10.0;
  sc.n_frames = 1;
  const DwellResult d = SimulateDwell(point, sc, array, plan, PhaseSolver(flip), Quiet(), 0.0);
  const Vec3 r = Animate(point, sc, 0).centers[0];
  double worst = 0.0;
  for (std::size_t rx = 0; rx < array.NumRx(); ++rx)
  {
    for (std::size_t tx = 0; tx < array.NumTx(); ++tx)
    {
      // Least-squares slope of the unwrapped phase against the subcarrier index.
      std::vector<double> phase;
      for (std::size_t kk = 0; kk < plan.Count(); ++kk)
      {
        double p = std::arg(d.tensor(rx, tx, kk, 0));
        if (!phase.empty())
        {
          p += kTwoPi * std::round((phase.back() - p) / kTwoPi);
        }
        phase.push_back(p);
      }
      const double n = static_cast<double>(phase.size());
      const double mk = (n - 1.0) / 2.0;
      double mp = 0.0;
      for (double p : phase)
      {
        mp += p / n;
      }
      double sxy = 0.0;
      double sxx = 0.0;
      for (std::size_t i = 0; i < phase.size(); ++i)
      {
        sxy += (static_cast<double>(i) - mk) * (phase[i] - mp);
        sxx += (static_cast<double>(i) - mk) * (static_cast<double>(i) - mk);
      }
      const double path = (r - array.tx_positions[tx]).norm() + (r - array.rx_positions[rx]).norm();
      const double expected = -kTwoPi * df * path / constants::c0;
      worst = std::max(worst, std::abs(sxy / sxx / expected - 1.0));
    }
  }
  return worst;
}

double DopplerPhase(bool flip)
{
  ArraySpec spec;
  const ArrayGeometry array = MakeCrossArray(spec);
  const SubcarrierPlan plan = SubcarrierPlan::Full(spec.carrier_hz, 120e3, 1);
  const TargetModel point = PointTarget(0.005, Dielectric(3.0));
  ScenarioConfig sc;
  sc.R0 = 10.0;
  sc.psi0_deg = 180.0;  // heading straight at the array
  sc.v = 1.0;
  sc.dt = 0.01;
  sc.n_frames = 4;
  const DwellResult d = SimulateDwell(point, sc, array, plan, PhaseSolver(flip), Quiet(), 0.0);
  const double lambda = constants::c0 / spec.carrier_hz;
  const double expected = 4.0 * std::numbers::pi * sc.v * sc.dt / lambda;
  double worst = 0.0;
  for (std::size_t rx = 0; rx < array.NumRx(); ++rx)
  {
    for (std::size_t tx = 0; tx < array.NumTx(); ++tx)
    {
      for (std::size_t m = 0; m + 1 < sc.n_frames; ++m)
      {
        const double step = std::arg(d.tensor(rx, tx, 0, m + 1) * std::conj(d.tensor(rx, tx, 0, m)));
        worst = std::max(worst, std::abs(step / expected - 1.0));
      }
    }
  }
  return worst;
}

double AnglePeak(bool flip)
{
  ArraySpec spec;
  const ArrayGeometry array = MakeCrossArray(spec);
  const Wavenumber k = Wavenumber::FromFrequency(spec.carrier_hz);
  const double az = 20.0 * std::numbers::pi / 180.0;
  const double el = 10.0 * std::numbers::pi / 180.0;
  const Vec3 u(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  const ScattererSnapshot voxel = MakeCubeSnapshot(20.0 * u, 0.005, 1, Dielectric(3.0));
  const TransferMatrices t = SolveTransfer(voxel, array, k, PhaseSolver(flip));
  const Eigen::MatrixXcd h = AssembleChannel(voxel, t, array, k);
  ComplexTensor tensor({array.NumRx(), array.NumTx(), 1, 1});
  for (std::size_t r = 0; r < array.NumRx(); ++r)
  {
    for (std::size_t c = 0; c < array.NumTx(); ++c)
    {
      tensor(r, c, 0, 0) = h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  const RealTensor spec4 = Fft4dSpectrum(tensor);
  std::size_t best_r = 0;
  std::size_t best_t = 0;
  for (std::size_t a = 0; a < spec4.dim(0); ++a)
  {
    for (std::size_t b = 0; b < spec4.dim(1); ++b)
    {
      if (spec4(a, b, 0, 0) > spec4(best_r, best_t, 0, 0))
      {
        best_r = a;
        best_t = b;
      }
    }
  }
  // Steering oracle: element phase advances by 2 pi (d / lambda) u along the array axis.
  const double d_over_lambda = array.spacing / array.lambda_c;
  const double expect_t = static_cast<double>(array.NumTx()) * d_over_lambda * u.y();
  const double expect_r = static_cast<double>(array.NumRx()) * d_over_lambda * u.z();
  return std::max(std::abs(static_cast<double>(CenteredBin(best_t, spec4.dim(1))) - expect_t),
                  std::abs(static_cast<double>(CenteredBin(best_r, spec4.dim(0))) - expect_r));
}

double SampleRoundTrip(std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexTensor t({3, 2, 4, 5});
  for (auto &z : t.data())
  {
    z = {g(rng), g(rng)};
  }
  const DatasetSample s = DatasetSample::FromComplex(t, 1, {{"check", "round_trip"}});
  const auto bytes = EncodeSample(s);
  const DatasetSample back = DecodeSample(bytes);
  return (back == s && EncodeSample(back) == bytes) ? 0.0 : 1.0;
}

}  // namespace

std::vector<CheckResult> RunValidation(const ValidationOptions &opts)
{
  const bool flip = opts.flip_self_term;
  const auto exact = [](double m, double) { return m == 0.0; };
  std::vector<CheckResult> out;
  out.push_back(Timed("dipole_green_consistency", 1e-10, [&] { return DipoleConsistency(opts.seed); }));
  out.push_back(Timed("green_reciprocity", 1e-12, [&] { return Reciprocity(opts.seed + 1); }));
  out.push_back(Timed("zero_contrast_nulling", 0.0, [&] { return ZeroContrast(flip); }, exact));
  out.push_back(Timed("clausius_mossotti", 1e-8, [&] { return ClausiusMossotti(flip); }));
  out.push_back(Timed("born_slope_deviation", 0.1, [&] { return BornSlope(flip); }));
  out.push_back(Timed("fft_matvec_vs_dense", 1e-10, [&] { return MatvecEquivalence(opts.seed + 2, flip); }));
  out.push_back(Timed("iterative_vs_dense_direct", 1e-5, [&] { return SolveEquivalence(flip); }));
  out.push_back(Timed("subcarrier_phase_slope", 0.02, [&] { return SubcarrierSlope(flip); }));
  out.push_back(Timed("doppler_phase_step", 0.05, [&] { return DopplerPhase(flip); }));
  out.push_back(Timed("fft4d_angle_peak_bins", 1.0, [&] { return AnglePeak(flip); }));
  out.push_back(Timed("sample_round_trip", 0.0, [&] { return SampleRoundTrip(opts.seed + 3); }, exact));
  return out;
}

std::string FormatValidation(const std::vector<CheckResult> &results)
{
  std::ostringstream out;
  out << std::setprecision(3) << std::scientific;
  for (const auto &r : results)
  {
    out << r.name << ' ' << r.measured << ' ' << r.bound << ' ' << (r.pass ? "PASS" : "FAIL") << '\n';
  }
  return out.str();
}

std::vector<BenchRow> RunBench(const std::vector<std::size_t> &sizes)
{
  ArraySpec spec;
  spec.carrier_hz = 1e9;
  const ArrayGeometry array = MakeCrossArray(spec);
  const Wavenumber k = Wavenumber::FromFrequency(spec.carrier_hz);
  SolverConfig dense;
  dense.mode = SolverMode::DenseDirect;
  SolverConfig fft;
  fft.mode = SolverMode::IterativeFft;
  fft.tolerance = 1e-8;
  fft.max_iterations = 2000;

  std::vector<BenchRow> rows;
  for (std::size_t n : sizes)
  {
    if (n == 0)
    {
      Fail(ErrorCode::InvalidArgument, "bench: sizes must be positive");
    }
    const ScattererSnapshot block = LatticeBlock(n, k.Wavelength() / 10.0, Vec3(5.0, 0.0, 0.0), Dielectric(3.0, 0.01));
    BenchRow row;
    row.n_s = n;
    auto t0 = Clock::now();
    const TransferMatrices a = SolveTransfer(block, array, k, dense);
    const Eigen::MatrixXcd ha = AssembleChannel(block, a, array, k);
    row.dense_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    t0 = Clock::now();
    const TransferMatrices b = SolveTransfer(block, array, k, fft);
    const Eigen::MatrixXcd hb = AssembleChannel(block, b, array, k);
    row.fft_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    row.fft_iterations = b.iterations;
    row.h_relative_difference = (ha - hb).norm() / ha.norm();
    rows.push_back(row);
  }
  return rows;
}

std::string BenchCsv(const std::vector<BenchRow> &rows)
{
  std::ostringstream out;
  out << "n_s,dense_seconds,fft_seconds,fft_iterations,h_relative_difference\n" << std::setprecision(6);
  for (const auto &r : rows)
  {
    out << r.n_s << ',' << r.dense_seconds << ',' << r.fft_seconds << ',' << r.fft_iterations << ','
        << r.h_relative_difference << '\n';
  }
  return out.str();
}

}  // namespace nfsim
