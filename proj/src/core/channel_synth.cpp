// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/channel_synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "core/error.hpp"
#include "core/log.hpp"
#include "core/parallel.hpp"

namespace nfsim
{

namespace
{

void CheckGuard(const ScattererSnapshot &snapshot, const std::vector<Vec3> &elements, const char *what)
{
  const double guard = 0.5 * snapshot.Side();
  for (std::size_t n = 0; n < snapshot.NumVoxels(); ++n)
  {
    for (std::size_t e = 0; e < elements.size(); ++e)
    {
      if ((snapshot.centers[n] - elements[e]).norm() <= guard)
      {
        std::ostringstream msg;
        msg << what << ": voxel " << n << " coincides with array element " << e;
        Fail(ErrorCode::Domain, msg.str());
      }
    }
  }
}

}  // namespace

SubcarrierPlan SubcarrierPlan::Full(double carrier_hz, double spacing_hz, std::size_t grid_size)
{
  SubcarrierPlan p;
  p.carrier_hz = carrier_hz;
  p.spacing_hz = spacing_hz;
  p.grid_size = grid_size;
  p.indices.resize(grid_size);
  for (std::size_t k = 0; k < grid_size; ++k)
  {
    p.indices[k] = k;
  }
  p.Validate();
  return p;
}

SubcarrierPlan SubcarrierPlan::Select(const std::vector<std::size_t> &grid_indices) const
{
  SubcarrierPlan p = *this;
  p.indices = grid_indices;
  p.Validate();
  return p;
}

double SubcarrierPlan::FrequencyOfGridIndex(std::size_t k) const
{
  return carrier_hz + (static_cast<double>(k) - 0.5 * static_cast<double>(grid_size - 1)) * spacing_hz;
}

std::vector<double> SubcarrierPlan::Frequencies() const
{
  std::vector<double> f;
  f.reserve(indices.size());
  for (std::size_t k : indices)
  {
    f.push_back(FrequencyOfGridIndex(k));
  }
  return f;
}

double SubcarrierPlan::MaxFrequency() const
{
  const auto f = Frequencies();
  return f.empty() ? carrier_hz : *std::max_element(f.begin(), f.end());
}

void SubcarrierPlan::Validate() const
{
  if (!(carrier_hz > 0.0) || !(spacing_hz >= 0.0) || grid_size == 0)
  {
    Fail(ErrorCode::InvalidArgument, "subcarriers: need positive carrier, non-negative spacing, K >= 1");
  }
  if (indices.empty())
  {
    Fail(ErrorCode::InvalidArgument, "subcarriers: selection must be non-empty");
  }
  for (std::size_t i = 0; i < indices.size(); ++i)
  {
    if (indices[i] >= grid_size)
    {
      std::ostringstream msg;
      msg << "subcarriers: index " << indices[i] << " outside grid of " << grid_size;
      Fail(ErrorCode::InvalidArgument, msg.str());
    }
    if (i > 0 && indices[i] <= indices[i - 1])
    {
      Fail(ErrorCode::InvalidArgument, "subcarriers: selection must be strictly increasing");
    }
  }
  if (!(FrequencyOfGridIndex(0) > 0.0))
  {
    Fail(ErrorCode::InvalidArgument, "subcarriers: lowest subcarrier frequency must be positive");
  }
}

void NoiseConfig::Validate() const
{
  if (!(R_ref > 0.0))
  {
    Fail(ErrorCode::InvalidArgument, "noise: R_ref must be positive");
  }
  if (!std::isfinite(target_snr_db))
  {
    Fail(ErrorCode::InvalidArgument, "noise: target SNR must be finite");
  }
}

ProbingScheme ProbingScheme::IdentitySweep(std::size_t n_tx, std::size_t n_subcarriers)
{
  ProbingScheme p;
  for (std::size_t k = 0; k < n_subcarriers; ++k)
  {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_tx));
    x(static_cast<Eigen::Index>(k % n_tx)) = 1.0;
    p.vectors.push_back(std::move(x));
  }
  return p;
}

void ProbingScheme::Validate(std::size_t n_tx) const
{
  for (const auto &x : vectors)
  {
    if (static_cast<std::size_t>(x.size()) != n_tx || x.isZero(0.0))
    {
      Fail(ErrorCode::InvalidArgument, "probing: vectors must be nonzero with N_t entries");
    }
  }
}

Eigen::MatrixXcd ReceiveMatrix(const ScattererSnapshot &snapshot, const ArrayGeometry &array, const Wavenumber &k)
{
  array.Validate();
  CheckGuard(snapshot, array.rx_positions, "receive_matrix");
  const auto nr = static_cast<Eigen::Index>(array.NumRx());
  const auto ns = static_cast<Eigen::Index>(snapshot.NumVoxels());
  Eigen::MatrixXcd b(nr, 3 * ns);
  for (Eigen::Index r = 0; r < nr; ++r)
  {
    const CVec3 q = array.rx_polarizations[static_cast<std::size_t>(r)].cast<cdouble>();
    for (Eigen::Index n = 0; n < ns; ++n)
    {
      const Dyad G = DyadicGreen(array.rx_positions[static_cast<std::size_t>(r)],
                                 snapshot.centers[static_cast<std::size_t>(n)], k);
      b.block<1, 3>(r, 3 * n) = q.adjoint() * G;
    }
  }
  return b;
}

Eigen::MatrixXcd AssembleChannel(const ScattererSnapshot &snapshot, const TransferMatrices &transfer,
                                 const ArrayGeometry &array, const Wavenumber &k)
{
  if (transfer.NumVoxels() != snapshot.NumVoxels() || transfer.snapshot_fingerprint != Fingerprint(snapshot) ||
      transfer.k0 != k.k0 || static_cast<std::size_t>(transfer.fields.cols()) != array.NumTx())
  {
    Fail(ErrorCode::InvalidArgument, "assemble_channel: transfer matrices were not solved on this snapshot/subcarrier");
  }
  const auto ns = static_cast<Eigen::Index>(snapshot.NumVoxels());
  Eigen::MatrixXcd weighted = transfer.fields;
  bool any = false;
  for (Eigen::Index n = 0; n < ns; ++n)
  {
    const cdouble chi = ContrastAt(snapshot.materials[static_cast<std::size_t>(n)], k);
    any = any || chi != 0.0;
    weighted.middleRows(3 * n, 3) *= chi;
  }
  if (!any)
  {
    return Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(array.NumRx()), static_cast<Eigen::Index>(array.NumTx()));
  }
  return (k.k0 * k.k0 * snapshot.delta_v) * (ReceiveMatrix(snapshot, array, k) * weighted);
}

void AddComplexNoise(Eigen::MatrixXcd &h, double sigma, std::uint64_t seed)
{
  if (sigma <= 0.0)
  {
    return;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma / std::sqrt(2.0));
  for (Eigen::Index j = 0; j < h.cols(); ++j)
  {
    for (Eigen::Index i = 0; i < h.rows(); ++i)
    {
      const double re = gauss(rng);
      const double im = gauss(rng);
      h(i, j) += cdouble(re, im);
    }
  }
}

Eigen::VectorXcd Receive(const Eigen::MatrixXcd &h, const Eigen::VectorXcd &x, double sigma_s, std::uint64_t seed)
{
  if (h.cols() != x.size())
  {
    Fail(ErrorCode::InvalidArgument, "receive: H columns must match probing vector length");
  }
  Eigen::MatrixXcd y = h * x;
  AddComplexNoise(y, sigma_s, seed);
  return y.col(0);
}

double CalibrateNoise(const NoiseConfig &noise, double calibration_power)
{
  noise.Validate();
  if (!(calibration_power > 0.0) || !std::isfinite(calibration_power))
  {
    Fail(ErrorCode::InvalidArgument, "calibrate_noise: calibration channel has zero energy");
  }
  return std::sqrt(calibration_power / std::pow(10.0, noise.target_snr_db / 10.0));
}

double CalibrationPower(const ArrayGeometry &array, const SubcarrierPlan &plan, const SolverConfig &solver,
                        const NoiseConfig &noise, double pitch)
{
  noise.Validate();
  plan.Validate();
  if (!(pitch > 0.0))
  {
    Fail(ErrorCode::InvalidArgument, "calibration: pitch must be positive");
  }
  const auto cells = static_cast<std::size_t>(std::ceil(1.0 / pitch - 1e-9));
  const Material dielectric{3.0, 0.0, PartTag::Body, 0.0};
  const ScattererSnapshot cube = MakeCubeSnapshot(Vec3(noise.R_ref, 0.0, 0.0), 1.0, cells, dielectric);
  double power = 0.0;
  std::size_t count = 0;
  for (double f : plan.Frequencies())
  {
    const Wavenumber k = Wavenumber::FromFrequency(f);
    const TransferMatrices t = SolveTransfer(cube, array, k, solver);
    const Eigen::MatrixXcd h = AssembleChannel(cube, t, array, k);
    power += h.squaredNorm();
    count += static_cast<std::size_t>(h.size());
  }
  return power / static_cast<double>(count);
}

ComplexTensor StackDwell(const std::vector<ChannelCell> &cells, std::size_t n_subcarriers, std::size_t n_frames)
{
  if (cells.empty() || n_subcarriers == 0 || n_frames == 0)
  {
    Fail(ErrorCode::InvalidArgument, "stack_dwell: empty grid");
  }
  const auto nr = static_cast<std::size_t>(cells.front().h.rows());
  const auto nt = static_cast<std::size_t>(cells.front().h.cols());
  ComplexTensor out({nr, nt, n_subcarriers, n_frames});
  std::vector<char> seen(n_subcarriers * n_frames, 0);
  for (const auto &c : cells)
  {
    if (c.k >= n_subcarriers || c.m >= n_frames)
    {
      std::ostringstream msg;
      msg << "stack_dwell: cell (k=" << c.k << ", m=" << c.m << ") outside the grid";
      Fail(ErrorCode::InvalidArgument, msg.str());
    }
    if (static_cast<std::size_t>(c.h.rows()) != nr || static_cast<std::size_t>(c.h.cols()) != nt)
    {
      Fail(ErrorCode::InvalidArgument, "stack_dwell: channel matrices differ in shape");
    }
    seen[c.k * n_frames + c.m] = 1;
    for (std::size_t r = 0; r < nr; ++r)
    {
      for (std::size_t t = 0; t < nt; ++t)
      {
        out(r, t, c.k, c.m) = c.h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t));
      }
    }
  }
  for (std::size_t k = 0; k < n_subcarriers; ++k)
  {
    for (std::size_t m = 0; m < n_frames; ++m)
    {
      if (!seen[k * n_frames + m])
      {
        std::ostringstream msg;
        msg << "stack_dwell: missing cell (k=" << k << ", m=" << m << ")";
        Fail(ErrorCode::InvalidArgument, msg.str());
      }
    }
  }
  return out;
}

Eigen::MatrixXcd SliceDwell(const ComplexTensor &tensor, std::size_t k, std::size_t m)
{
  const std::size_t nr = tensor.dim(0);
  const std::size_t nt = tensor.dim(1);
  Eigen::MatrixXcd h(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nt));
  for (std::size_t r = 0; r < nr; ++r)
  {
    for (std::size_t t = 0; t < nt; ++t)
    {
      h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = tensor(r, t, k, m);
    }
  }
  return h;
}

nlohmann::json ScenarioToJson(const ScenarioConfig &cfg)
{
  const auto heading = cfg.Heading();
  return {{"R0", cfg.R0},
          {"psi0_deg", cfg.psi0_deg},
          {"v", cfg.v},
          {"azimuth_deg", cfg.azimuth_deg},
          {"z_center", cfg.z_center},
          {"heading", {heading.x(), heading.y()}},
          {"n_frames", cfg.n_frames},
          {"dt", cfg.dt},
          {"rng_seed", cfg.rng_seed}};
}

ScenarioConfig ScenarioFromJson(const nlohmann::json &j)
{
  ScenarioConfig cfg;
  cfg.R0 = j.at("R0").get<double>();
  cfg.psi0_deg = j.at("psi0_deg").get<double>();
  cfg.v = j.at("v").get<double>();
  cfg.azimuth_deg = j.at("azimuth_deg").get<double>();
  cfg.z_center = j.value("z_center", 0.0);
  cfg.n_frames = j.at("n_frames").get<std::size_t>();
  cfg.dt = j.at("dt").get<double>();
  cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return cfg;
}

DwellResult SimulateDwell(const TargetModel &model, const ScenarioConfig &scenario, const ArrayGeometry &array,
                          const SubcarrierPlan &plan, const SolverConfig &solver, const NoiseConfig &noise,
                          double sigma_h)
{
  scenario.Validate();
  plan.Validate();
  noise.Validate();
  solver.Validate();
  array.Validate();
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t n_frames = scenario.n_frames;
  const std::size_t n_sub = plan.Count();
  std::vector<ScattererSnapshot> frames;
  frames.reserve(n_frames);
  for (std::size_t m = 0; m < n_frames; ++m)
  {
    frames.push_back(Animate(model, scenario, m));
    CheckGuard(frames.back(), array.tx_positions, "simulate_dwell");
    CheckGuard(frames.back(), array.rx_positions, "simulate_dwell");
  }
  const auto freqs = plan.Frequencies();

  std::vector<ChannelCell> cells(n_sub * n_frames);
  std::vector<double> residuals(cells.size(), 0.0);
  std::vector<std::size_t> iterations(cells.size(), 0);
  const bool noisy = noise.enabled && sigma_h > 0.0;

  ParallelFor(cells.size(), [&](std::size_t c) {
    const std::size_t k = c / n_frames;
    const std::size_t m = c % n_frames;
    try
    {
      const Wavenumber wk = Wavenumber::FromFrequency(freqs[k]);
      const TransferMatrices t = SolveTransfer(frames[m], array, wk, solver, plan.indices[k]);
      Eigen::MatrixXcd h = AssembleChannel(frames[m], t, array, wk);
      if (noisy)
      {
        AddComplexNoise(h, sigma_h, DeriveSeed(noise.rng_seed, {plan.indices[k], m}));
      }
      cells[c] = {k, m, std::move(h)};
      residuals[c] = t.residual;
      iterations[c] = t.iterations;
    }
    catch (const Error &e)
    {
      std::ostringstream msg;
      msg << "subcarrier " << plan.indices[k] << ", frame " << m << ": " << e.what();
      throw Error(e.code(), msg.str());
    }
  });

  DwellResult out;
  out.tensor = StackDwell(cells, n_sub, n_frames);
  out.diagnostics.n_voxels = model.NumVoxels();
  out.diagnostics.max_residual = *std::max_element(residuals.begin(), residuals.end());
  for (std::size_t it : iterations)
  {
    out.diagnostics.total_iterations += it;
    out.diagnostics.max_iterations = std::max(out.diagnostics.max_iterations, it);
  }
  out.diagnostics.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  out.metadata = {{"scenario", ScenarioToJson(scenario)},
                  {"label", static_cast<int>(model.label)},
                  {"class", ClassName(model.label)},
                  {"n_voxels", model.NumVoxels()},
                  {"subcarrier_indices", plan.indices},
                  {"frequencies_hz", freqs},
                  {"noise", {{"enabled", noisy}, {"seed", noise.rng_seed}, {"sigma_h", noisy ? sigma_h : 0.0}}},
                  {"solver",
                   {{"max_residual", out.diagnostics.max_residual},
                    {"total_iterations", out.diagnostics.total_iterations}}}};
  if (LogEnabled())
  {
    LogRecord({{"event", "dwell"},
               {"class", ClassName(model.label)},
               {"n_voxels", model.NumVoxels()},
               {"cells", cells.size()},
               {"max_residual", out.diagnostics.max_residual},
               {"total_iterations", out.diagnostics.total_iterations},
               {"wall_s", out.diagnostics.solve_seconds}});
  }
  return out;
}

}  // namespace nfsim
