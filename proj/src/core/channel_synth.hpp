// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "core/array_geometry.hpp"
#include "core/scene.hpp"
#include "core/tensor.hpp"
#include "core/vie_solver.hpp"

namespace nfsim
{

// OFDM grid f_k = f_c + (k - (K - 1) / 2) df, restricted to the listed grid indices.
struct SubcarrierPlan
{
  double carrier_hz = 4.9e9;
  double spacing_hz = 120e3;
  std::size_t grid_size = 1;
  std::vector<std::size_t> indices;  // ascending subset of [0, grid_size)

  static SubcarrierPlan Full(double carrier_hz, double spacing_hz, std::size_t grid_size);
  SubcarrierPlan Select(const std::vector<std::size_t> &grid_indices) const;
  double FrequencyOfGridIndex(std::size_t k) const;
  std::vector<double> Frequencies() const;
  std::size_t Count() const { return indices.size(); }
  double MaxFrequency() const;
  void Validate() const;
};

struct NoiseConfig
{
  bool enabled = true;
  double target_snr_db = 20.0;
  double R_ref = 50.0;  // m
  std::uint64_t rng_seed = 0;

  void Validate() const;
};

// Per-subcarrier probing vectors x_k (N_t entries each).
struct ProbingScheme
{
  std::vector<Eigen::VectorXcd> vectors;

  // x_k = e_{k mod N_t}.
  static ProbingScheme IdentitySweep(std::size_t n_tx, std::size_t n_subcarriers);
  void Validate(std::size_t n_tx) const;
};

// Stacked receive matrices [B(r_1) ... B(r_Ns)], N_r x 3 N_s; B(r_n) row r is q_r^H G(rx_r, r_n).
Eigen::MatrixXcd ReceiveMatrix(const ScattererSnapshot &snapshot, const ArrayGeometry &array, const Wavenumber &k);

// H_k = k0^2 dV sum_n B(r_n) chi_n A(r_n).
Eigen::MatrixXcd AssembleChannel(const ScattererSnapshot &snapshot, const TransferMatrices &transfer,
                                 const ArrayGeometry &array, const Wavenumber &k);

// y = H x + z, z ~ CN(0, sigma^2 I), deterministic in seed.
Eigen::VectorXcd Receive(const Eigen::MatrixXcd &h, const Eigen::VectorXcd &x, double sigma_s, std::uint64_t seed);

// Adds sigma^2-variance circular complex Gaussian noise entrywise.
void AddComplexNoise(Eigen::MatrixXcd &h, double sigma, std::uint64_t seed);

// sigma_H with mean |H|^2 / sigma_H^2 equal to the target SNR.
double CalibrateNoise(const NoiseConfig &noise, double calibration_power);

// Mean |H entry|^2 of the calibration target: a 1 m^3 eps_r = 3 cube on boresight at R_ref,
// voxelized with the given pitch (rounded so an integer number of cells spans 1 m).
double CalibrationPower(const ArrayGeometry &array, const SubcarrierPlan &plan, const SolverConfig &solver,
                        const NoiseConfig &noise, double pitch);

struct ChannelCell
{
  std::size_t k = 0;
  std::size_t m = 0;
  Eigen::MatrixXcd h;
};

// (N_r, N_t, K, N_p) tensor from a complete (k, m) grid given in any order.
ComplexTensor StackDwell(const std::vector<ChannelCell> &cells, std::size_t n_subcarriers, std::size_t n_frames);

// N_r x N_t channel matrix at (k, m) of a stacked dwell.
Eigen::MatrixXcd SliceDwell(const ComplexTensor &tensor, std::size_t k, std::size_t m);

struct DwellDiagnostics
{
  double max_residual = 0.0;
  std::size_t total_iterations = 0;
  std::size_t max_iterations = 0;
  std::size_t n_voxels = 0;
  double solve_seconds = 0.0;
};

struct DwellResult
{
  ComplexTensor tensor;  // (N_r, N_t, plan.Count(), N_p)
  nlohmann::json metadata;
  DwellDiagnostics diagnostics;
};

// animate -> solve -> assemble -> noise -> stack over every (k, m) cell of the plan. Noise
// is added only when sigma_h > 0 and noise.enabled; each cell draws from its own seed.
DwellResult SimulateDwell(const TargetModel &model, const ScenarioConfig &scenario, const ArrayGeometry &array,
                          const SubcarrierPlan &plan, const SolverConfig &solver, const NoiseConfig &noise,
                          double sigma_h);

nlohmann::json ScenarioToJson(const ScenarioConfig &cfg);
ScenarioConfig ScenarioFromJson(const nlohmann::json &j);

}  // namespace nfsim
