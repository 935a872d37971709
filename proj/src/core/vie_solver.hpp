// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "core/array_geometry.hpp"
#include "core/em_kernels.hpp"
#include "core/fft.hpp"
#include "core/scene.hpp"

namespace nfsim
{

enum class SolverMode
{
  DenseDirect,
  IterativeDense,
  IterativeFft,
  // DenseDirect up to auto_dense_limit voxels, then IterativeFft on a lattice and
  // IterativeDense otherwise.
  Auto,
};

enum class SelfTerm
{
  StaticOnly,
  StaticPlusRadiative,
};

std::string ToString(SolverMode mode);
std::string ToString(SelfTerm self_term);
SolverMode SolverModeFromString(const std::string &s);
SelfTerm SelfTermFromString(const std::string &s);

struct SolverConfig
{
  double tolerance = 1e-6;
  std::size_t max_iterations = 500;
  std::size_t restart = 60;
  SolverMode mode = SolverMode::Auto;
  // High-contrast shells converge slowly under GMRES; below this size one LU is cheaper.
  std::size_t auto_dense_limit = 800;
  SelfTerm self_term = SelfTerm::StaticPlusRadiative;
  // Largest allowed voxel side in wavelengths at the solve frequency; 0 disables the check.
  double max_side_wavelengths = 0.125;
  // Test hook: flips the sign of the static self-term.
  bool fault_flip_self_term = false;

  void Validate() const;
};

// Diagonal self-interaction coefficient: the voxel's own cell contributes C_self * chi * E.
// Static principal-value part -1/3 (depolarization dyad I/3); the radiative correction
// -j k0^3 dV / (6 pi) follows the e^{-j k0 R} convention.
cdouble SelfCoefficient(const Wavenumber &k, double delta_v, SelfTerm self_term, bool flip_static_sign = false);

// Per-solve view of a snapshot: centers, volume, and per-voxel contrast at one frequency.
struct VoxelSystem
{
  std::vector<Vec3> centers;
  double delta_v = 0.0;
  Eigen::VectorXcd chi;
  std::optional<LatticeFrame> lattice;
  Wavenumber k;
  cdouble self_coefficient;

  std::size_t NumVoxels() const { return centers.size(); }
  // 1 - C_self chi_n for every voxel, repeated per component (3 N entries).
  Eigen::VectorXcd Diagonal() const;
};

VoxelSystem MakeVoxelSystem(const ScattererSnapshot &snapshot, const Wavenumber &k, const SolverConfig &cfg);
VoxelSystem MakeVoxelSystem(std::vector<Vec3> centers, double delta_v, Eigen::VectorXcd chi,
                            std::optional<LatticeFrame> lattice, const Wavenumber &k, const SolverConfig &cfg);

// E -> E - k0^2 dV sum_{n' != n} G(r_n, r_n') chi_n' E_n' - C_self chi_n E_n, on 3 N unknowns
// ordered (voxel, component).
class InteractionOperator
{
public:
  virtual ~InteractionOperator() = default;
  virtual Eigen::MatrixXcd Apply(const Eigen::MatrixXcd &x) const = 0;
  virtual std::size_t Size() const = 0;
};

class DenseInteraction final : public InteractionOperator
{
public:
  explicit DenseInteraction(const VoxelSystem &system);
  Eigen::MatrixXcd Apply(const Eigen::MatrixXcd &x) const override;
  std::size_t Size() const override { return static_cast<std::size_t>(matrix_.rows()); }
  const Eigen::MatrixXcd &Matrix() const { return matrix_; }

private:
  Eigen::MatrixXcd matrix_;
};

// Same operator through a zero-padded 3-D circulant convolution on the voxel lattice. The
// six distinct dyad components of the kernel are transformed once and reused for every
// column and iteration.
class FftInteraction final : public InteractionOperator
{
public:
  explicit FftInteraction(const VoxelSystem &system);
  ~FftInteraction() override;
  Eigen::MatrixXcd Apply(const Eigen::MatrixXcd &x) const override;
  std::size_t Size() const override { return 3 * cells_.size(); }

private:
  std::array<int, 3> padded_{};
  std::size_t grid_size_ = 0;
  std::vector<std::size_t> cells_;  // padded-grid linear index per voxel
  Eigen::VectorXcd chi_;
  Eigen::VectorXcd diag_;
  FftBuffer kernel_;  // 6 components x grid
  mutable FftBuffer work_;  // 3 components x grid
  std::unique_ptr<FftPlan> forward_;
  std::unique_ptr<FftPlan> backward_;
};

std::unique_ptr<DenseInteraction> AssembleInteraction(const ScattererSnapshot &snapshot, const Wavenumber &k,
                                                      const SolverConfig &cfg = {});

// Lattice-accelerated application of the interaction operator to one field vector.
Eigen::VectorXcd FastMatvec(const ScattererSnapshot &snapshot, const Eigen::VectorXcd &field, const Wavenumber &k,
                            const SolverConfig &cfg = {});

struct TransferMatrices
{
  // 3 N_s x N_t: rows 3n..3n+2 hold A_k(r_n).
  Eigen::MatrixXcd fields;
  std::size_t subcarrier = 0;
  double k0 = 0.0;
  double residual = 0.0;  // true relative residual, max over columns
  std::size_t iterations = 0;
  SolverMode mode_used = SolverMode::DenseDirect;
  double wall_seconds = 0.0;
  std::uint64_t snapshot_fingerprint = 0;

  std::size_t NumVoxels() const { return static_cast<std::size_t>(fields.rows() / 3); }
  Eigen::MatrixXcd At(std::size_t n) const { return fields.middleRows(static_cast<Eigen::Index>(3 * n), 3); }
};

std::uint64_t Fingerprint(const ScattererSnapshot &snapshot);

// Stacked incident matrices A_inc(r_n), 3 N_s x N_t.
Eigen::MatrixXcd IncidentFields(const std::vector<Vec3> &centers, const ArrayGeometry &array, const Wavenumber &k);

struct SolveOutput
{
  Eigen::MatrixXcd x;
  double residual = 0.0;
  std::size_t iterations = 0;
  SolverMode mode_used = SolverMode::DenseDirect;
};

// Solves the discretized system for arbitrary right-hand sides.
SolveOutput SolveSystem(const VoxelSystem &system, const Eigen::MatrixXcd &rhs, const SolverConfig &cfg);

TransferMatrices SolveTransfer(const ScattererSnapshot &snapshot, const ArrayGeometry &array, const Wavenumber &k,
                               const SolverConfig &cfg, std::size_t subcarrier = 0);

CVec3 ScatteredField(const ScattererSnapshot &snapshot, const TransferMatrices &transfer,
                     const Eigen::VectorXcd &excitation, const Vec3 &r_obs, const Wavenumber &k);

}  // namespace nfsim
