// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/vie_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string_view>

#include <Eigen/LU>

#include "core/error.hpp"
#include "core/gmres.hpp"
#include "core/log.hpp"

namespace nfsim
{

namespace
{

constexpr std::array<std::array<int, 2>, 6> kDyadComponents{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

// Index into kDyadComponents for (a, b), symmetric.
constexpr int ComponentSlot(int a, int b)
{
  constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return table[a][b];
}

void CheckDuplicates(const std::vector<Vec3> &centers, double side)
{
  std::vector<std::size_t> order(centers.size());
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const auto &p = centers[a];
    const auto &q = centers[b];
    if (p.x() != q.x())
    {
      return p.x() < q.x();
    }
    if (p.y() != q.y())
    {
      return p.y() < q.y();
    }
    return p.z() < q.z();
  };
  std::sort(order.begin(), order.end(), less);
  // Near-duplicates can only be adjacent in x-order if their x agrees closely; scan a window.
  const double tol = 1e-9 * side;
  for (std::size_t i = 0; i < order.size(); ++i)
  {
    for (std::size_t j = i + 1; j < order.size(); ++j)
    {
      const Vec3 &p = centers[order[i]];
      const Vec3 &q = centers[order[j]];
      if (q.x() - p.x() > tol)
      {
        break;
      }
      if ((p - q).norm() <= tol)
      {
        std::ostringstream msg;
        msg << "duplicate voxel centers " << std::min(order[i], order[j]) << " and " << std::max(order[i], order[j]);
        Fail(ErrorCode::InvalidArgument, msg.str());
      }
    }
  }
}

using Clock = std::chrono::steady_clock;

}  // namespace

std::string ToString(SolverMode mode)
{
  switch (mode)
  {
    case SolverMode::DenseDirect:
      return "dense_direct";
    case SolverMode::IterativeDense:
      return "iterative_dense";
    case SolverMode::IterativeFft:
      return "iterative_fft";
    case SolverMode::Auto:
      return "auto";
  }
  return "auto";
}

std::string ToString(SelfTerm self_term)
{
  return self_term == SelfTerm::StaticOnly ? "static_only" : "static_plus_radiative";
}

SolverMode SolverModeFromString(const std::string &s)
{
  for (auto m : {SolverMode::DenseDirect, SolverMode::IterativeDense, SolverMode::IterativeFft, SolverMode::Auto})
  {
    if (ToString(m) == s)
    {
      return m;
    }
  }
  Fail(ErrorCode::Config, "unknown solver mode '" + s + "'");
}

SelfTerm SelfTermFromString(const std::string &s)
{
  for (auto m : {SelfTerm::StaticOnly, SelfTerm::StaticPlusRadiative})
  {
    if (ToString(m) == s)
    {
      return m;
    }
  }
  Fail(ErrorCode::Config, "unknown self term '" + s + "'");
}

void SolverConfig::Validate() const
{
  if (!(tolerance > 0.0 && tolerance <= 1e-2))
  {
    Fail(ErrorCode::InvalidArgument, "solver: tolerance must lie in (0, 1e-2]");
  }
  if (max_iterations < 1)
  {
    Fail(ErrorCode::InvalidArgument, "solver: max_iterations must be >= 1");
  }
  if (restart < 1)
  {
    Fail(ErrorCode::InvalidArgument, "solver: restart must be >= 1");
  }
  if (!(max_side_wavelengths >= 0.0))
  {
    Fail(ErrorCode::InvalidArgument, "solver: max_side_wavelengths must be >= 0");
  }
}

cdouble SelfCoefficient(const Wavenumber &k, double delta_v, SelfTerm self_term, bool flip_static_sign)
{
  cdouble c = flip_static_sign ? 1.0 / 3.0 : -1.0 / 3.0;
  if (self_term == SelfTerm::StaticPlusRadiative)
  {
    c += -kJ * (k.k0 * k.k0 * k.k0 * delta_v / (6.0 * std::numbers::pi));
  }
  return c;
}

Eigen::VectorXcd VoxelSystem::Diagonal() const
{
  Eigen::VectorXcd d(3 * static_cast<Eigen::Index>(NumVoxels()));
  for (Eigen::Index n = 0; n < chi.size(); ++n)
  {
    d.segment<3>(3 * n).setConstant(1.0 - self_coefficient * chi(n));
  }
  return d;
}

VoxelSystem MakeVoxelSystem(std::vector<Vec3> centers, double delta_v, Eigen::VectorXcd chi,
                            std::optional<LatticeFrame> lattice, const Wavenumber &k, const SolverConfig &cfg)
{
  cfg.Validate();
  if (centers.empty() || static_cast<Eigen::Index>(centers.size()) != chi.size())
  {
    Fail(ErrorCode::InvalidArgument, "voxel system: need one contrast per voxel and at least one voxel");
  }
  if (!(delta_v > 0.0))
  {
    Fail(ErrorCode::InvalidArgument, "voxel system: voxel volume must be positive");
  }
  const double side = std::cbrt(delta_v);
  if (cfg.max_side_wavelengths > 0.0 && side > cfg.max_side_wavelengths * k.Wavelength() * (1.0 + 1e-12))
  {
    std::ostringstream msg;
    msg << "voxel side " << side << " m exceeds " << cfg.max_side_wavelengths << " wavelengths ("
        << cfg.max_side_wavelengths * k.Wavelength() << " m) at " << k.f << " Hz";
    Fail(ErrorCode::InvalidArgument, msg.str());
  }
  CheckDuplicates(centers, side);
  VoxelSystem sys;
  sys.centers = std::move(centers);
  sys.delta_v = delta_v;
  sys.chi = std::move(chi);
  sys.lattice = std::move(lattice);
  sys.k = k;
  sys.self_coefficient = SelfCoefficient(k, delta_v, cfg.self_term, cfg.fault_flip_self_term);
  return sys;
}

VoxelSystem MakeVoxelSystem(const ScattererSnapshot &snapshot, const Wavenumber &k, const SolverConfig &cfg)
{
  snapshot.Validate();
  Eigen::VectorXcd chi(static_cast<Eigen::Index>(snapshot.NumVoxels()));
  for (std::size_t n = 0; n < snapshot.NumVoxels(); ++n)
  {
    chi(static_cast<Eigen::Index>(n)) = ContrastAt(snapshot.materials[n], k);
  }
  return MakeVoxelSystem(snapshot.centers, snapshot.delta_v, std::move(chi), snapshot.lattice, k, cfg);
}

DenseInteraction::DenseInteraction(const VoxelSystem &system)
{
  const auto n = static_cast<Eigen::Index>(system.NumVoxels());
  matrix_ = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
  const double scale = system.k.k0 * system.k.k0 * system.delta_v;
  for (Eigen::Index i = 0; i < n; ++i)
  {
    matrix_.block<3, 3>(3 * i, 3 * i).diagonal().setConstant(1.0 - system.self_coefficient * system.chi(i));
    for (Eigen::Index j = i + 1; j < n; ++j)
    {
      const Dyad G = scale * DyadicGreen(system.centers[static_cast<std::size_t>(i)],
                                         system.centers[static_cast<std::size_t>(j)], system.k);
      matrix_.block<3, 3>(3 * i, 3 * j) = -G * system.chi(j);
      matrix_.block<3, 3>(3 * j, 3 * i) = -G * system.chi(i);
    }
  }
}

Eigen::MatrixXcd DenseInteraction::Apply(const Eigen::MatrixXcd &x) const
{
  return matrix_ * x;
}

FftInteraction::FftInteraction(const VoxelSystem &system)
{
  if (!system.lattice)
  {
    Fail(ErrorCode::InvalidArgument, "fast matvec: voxels are not on a regular lattice");
  }
  const LatticeFrame &lat = *system.lattice;
  const std::size_t nvox = system.NumVoxels();
  if (lat.indices.size() != nvox)
  {
    Fail(ErrorCode::InvalidArgument, "fast matvec: lattice indices do not cover every voxel");
  }
  // Every center must sit on its lattice site.
  const double tol = 1e-6 * lat.pitch;
  Eigen::Vector3i lo = lat.indices.front();
  Eigen::Vector3i hi = lo;
  for (std::size_t n = 0; n < nvox; ++n)
  {
    const Vec3 site = lat.origin + lat.pitch * (lat.rotation * lat.indices[n].cast<double>());
    if ((site - system.centers[n]).norm() > tol)
    {
      std::ostringstream msg;
      msg << "fast matvec: voxel " << n << " is off the lattice";
      Fail(ErrorCode::InvalidArgument, msg.str());
    }
    lo = lo.cwiseMin(lat.indices[n]);
    hi = hi.cwiseMax(lat.indices[n]);
  }
  std::array<int, 3> extent{};
  for (int a = 0; a < 3; ++a)
  {
    extent[static_cast<std::size_t>(a)] = hi[a] - lo[a] + 1;
    padded_[static_cast<std::size_t>(a)] = 2 * extent[static_cast<std::size_t>(a)];
  }
  grid_size_ = static_cast<std::size_t>(padded_[0]) * static_cast<std::size_t>(padded_[1]) *
               static_cast<std::size_t>(padded_[2]);
  auto linear = [&](int i, int j, int l) {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(padded_[1]) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(padded_[2]) +
           static_cast<std::size_t>(l);
  };
  cells_.resize(nvox);
  for (std::size_t n = 0; n < nvox; ++n)
  {
    const Eigen::Vector3i u = lat.indices[n] - lo;
    cells_[n] = linear(u.x(), u.y(), u.z());
  }
  chi_ = system.chi;
  diag_ = system.Diagonal();

  // Kernel on the padded grid; wrapped offsets beyond the physical extent stay zero.
  kernel_ = FftBuffer(6 * grid_size_);
  const double scale = system.k.k0 * system.k.k0 * system.delta_v;
  auto wrap = [](int i, int extent_a, int padded_a, int &offset) {
    if (i < extent_a)
    {
      offset = i;
      return true;
    }
    if (i > padded_a - extent_a)
    {
      offset = i - padded_a;
      return true;
    }
    return false;
  };
  for (int i = 0; i < padded_[0]; ++i)
  {
    int di = 0;
    if (!wrap(i, extent[0], padded_[0], di))
    {
      continue;
    }
    for (int j = 0; j < padded_[1]; ++j)
    {
      int dj = 0;
      if (!wrap(j, extent[1], padded_[1], dj))
      {
        continue;
      }
      for (int l = 0; l < padded_[2]; ++l)
      {
        int dl = 0;
        if (!wrap(l, extent[2], padded_[2], dl) || (di == 0 && dj == 0 && dl == 0))
        {
          continue;
        }
        const Vec3 d = lat.pitch * (lat.rotation * Vec3(di, dj, dl));
        const Dyad G = DyadicGreenDisplacement(d, system.k);
        const std::size_t cell = linear(i, j, l);
        for (std::size_t c = 0; c < kDyadComponents.size(); ++c)
        {
          kernel_.data()[c * grid_size_ + cell] = -scale * G(kDyadComponents[c][0], kDyadComponents[c][1]);
        }
      }
    }
  }
  const std::array<int, 4> kdims{6, padded_[0], padded_[1], padded_[2]};
  const std::array<int, 3> axes{1, 2, 3};
  {
    FftPlan kplan(kernel_.data(), kdims, axes, FftSign::Forward);
    kplan.Execute();
  }
  work_ = FftBuffer(3 * grid_size_);
  const std::array<int, 4> wdims{3, padded_[0], padded_[1], padded_[2]};
  forward_ = std::make_unique<FftPlan>(work_.data(), wdims, axes, FftSign::Forward);
  backward_ = std::make_unique<FftPlan>(work_.data(), wdims, axes, FftSign::Backward);
}

FftInteraction::~FftInteraction() = default;

Eigen::MatrixXcd FftInteraction::Apply(const Eigen::MatrixXcd &x) const
{
  const std::size_t nvox = cells_.size();
  if (static_cast<std::size_t>(x.rows()) != 3 * nvox)
  {
    Fail(ErrorCode::InvalidArgument, "fast matvec: field vector has the wrong length");
  }
  Eigen::MatrixXcd y(x.rows(), x.cols());
  const double inv_n = 1.0 / static_cast<double>(grid_size_);
  std::complex<double> *w = work_.data();
  const std::complex<double> *kern = kernel_.data();
  for (Eigen::Index col = 0; col < x.cols(); ++col)
  {
    work_.Zero();
    for (std::size_t n = 0; n < nvox; ++n)
    {
      const auto in = static_cast<Eigen::Index>(n);
      for (int a = 0; a < 3; ++a)
      {
        w[static_cast<std::size_t>(a) * grid_size_ + cells_[n]] = chi_(in) * x(3 * in + a, col);
      }
    }
    forward_->Execute();
    for (std::size_t q = 0; q < grid_size_; ++q)
    {
      const std::complex<double> u0 = w[q];
      const std::complex<double> u1 = w[grid_size_ + q];
      const std::complex<double> u2 = w[2 * grid_size_ + q];
      for (int a = 0; a < 3; ++a)
      {
        w[static_cast<std::size_t>(a) * grid_size_ + q] =
            kern[static_cast<std::size_t>(ComponentSlot(a, 0)) * grid_size_ + q] * u0 +
            kern[static_cast<std::size_t>(ComponentSlot(a, 1)) * grid_size_ + q] * u1 +
            kern[static_cast<std::size_t>(ComponentSlot(a, 2)) * grid_size_ + q] * u2;
      }
    }
    backward_->Execute();
    for (std::size_t n = 0; n < nvox; ++n)
    {
      const auto in = static_cast<Eigen::Index>(n);
      for (int a = 0; a < 3; ++a)
      {
        y(3 * in + a, col) =
            diag_(3 * in + a) * x(3 * in + a, col) + inv_n * w[static_cast<std::size_t>(a) * grid_size_ + cells_[n]];
      }
    }
  }
  return y;
}

std::unique_ptr<DenseInteraction> AssembleInteraction(const ScattererSnapshot &snapshot, const Wavenumber &k,
                                                      const SolverConfig &cfg)
{
  return std::make_unique<DenseInteraction>(MakeVoxelSystem(snapshot, k, cfg));
}

Eigen::VectorXcd FastMatvec(const ScattererSnapshot &snapshot, const Eigen::VectorXcd &field, const Wavenumber &k,
                            const SolverConfig &cfg)
{
  const FftInteraction op(MakeVoxelSystem(snapshot, k, cfg));
  return op.Apply(field);
}

std::uint64_t Fingerprint(const ScattererSnapshot &snapshot)
{
  std::string bytes(reinterpret_cast<const char *>(snapshot.centers.data()), snapshot.centers.size() * sizeof(Vec3));
  bytes.append(reinterpret_cast<const char *>(&snapshot.delta_v), sizeof(double));
  return std::hash<std::string_view>{}(bytes);
}

Eigen::MatrixXcd IncidentFields(const std::vector<Vec3> &centers, const ArrayGeometry &array, const Wavenumber &k)
{
  Eigen::MatrixXcd b(3 * static_cast<Eigen::Index>(centers.size()), static_cast<Eigen::Index>(array.NumTx()));
  for (std::size_t n = 0; n < centers.size(); ++n)
  {
    b.middleRows(3 * static_cast<Eigen::Index>(n), 3) = IncidentMatrix(centers[n], array, k);
  }
  return b;
}

SolveOutput SolveSystem(const VoxelSystem &system, const Eigen::MatrixXcd &rhs, const SolverConfig &cfg)
{
  cfg.Validate();
  SolverMode mode = cfg.mode;
  if (mode == SolverMode::Auto)
  {
    if (system.NumVoxels() <= cfg.auto_dense_limit)
    {
      mode = SolverMode::DenseDirect;
    }
    else
    {
      mode = system.lattice ? SolverMode::IterativeFft : SolverMode::IterativeDense;
    }
  }
  SolveOutput out;
  out.mode_used = mode;

  const Eigen::VectorXcd diag = system.Diagonal();
  const double diag_floor = 1e-13;
  for (Eigen::Index i = 0; i < diag.size(); ++i)
  {
    if (std::abs(diag(i)) < diag_floor)
    {
      std::ostringstream msg;
      msg << "singular system: self-term diagonal vanishes at voxel " << i / 3;
      Fail(ErrorCode::Singular, msg.str());
    }
  }

  auto relative_residual = [&](const InteractionOperator &op, const Eigen::MatrixXcd &x) {
    const Eigen::MatrixXcd r = rhs - op.Apply(x);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < rhs.cols(); ++j)
    {
      const double bn = rhs.col(j).norm();
      worst = std::max(worst, bn > 0.0 ? r.col(j).norm() / bn : r.col(j).norm());
    }
    return worst;
  };

  if (mode == SolverMode::DenseDirect)
  {
    const DenseInteraction op(system);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(op.Matrix());
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14))
    {
      std::ostringstream msg;
      msg << "singular system: reciprocal condition estimate " << rcond;
      Fail(ErrorCode::Singular, msg.str());
    }
    out.x = lu.solve(rhs);
    out.iterations = 1;
    out.residual = relative_residual(op, out.x);
    return out;
  }

  std::unique_ptr<InteractionOperator> op;
  if (mode == SolverMode::IterativeFft)
  {
    op = std::make_unique<FftInteraction>(system);
  }
  else
  {
    op = std::make_unique<DenseInteraction>(system);
  }
  const Eigen::VectorXcd inv_diag = diag.cwiseInverse();
  const GmresResult res = BlockGmres([&](const Eigen::MatrixXcd &v) { return op->Apply(v); }, inv_diag, rhs,
                                     cfg.tolerance, cfg.max_iterations, cfg.restart);
  out.x = res.x;
  out.iterations = res.iterations;
  out.residual = relative_residual(*op, out.x);
  if (!res.converged || out.residual > cfg.tolerance)
  {
    std::ostringstream msg;
    msg << "solver did not converge: relative residual " << out.residual << " after " << res.iterations
        << " iterations (tolerance " << cfg.tolerance << ")";
    Fail(ErrorCode::NotConverged, msg.str());
  }
  return out;
}

TransferMatrices SolveTransfer(const ScattererSnapshot &snapshot, const ArrayGeometry &array, const Wavenumber &k,
                               const SolverConfig &cfg, std::size_t subcarrier)
{
  const auto t0 = Clock::now();
  array.Validate();
  const VoxelSystem system = MakeVoxelSystem(snapshot, k, cfg);
  const Eigen::MatrixXcd rhs = IncidentFields(system.centers, array, k);

  TransferMatrices out;
  out.subcarrier = subcarrier;
  out.k0 = k.k0;
  out.snapshot_fingerprint = Fingerprint(snapshot);
  if (system.chi.isZero(0.0))
  {
    // No scatterer: the total field is the incident field exactly.
    out.fields = rhs;
    out.mode_used = cfg.mode;
  }
  else
  {
    SolveOutput s = SolveSystem(system, rhs, cfg);
    out.fields = std::move(s.x);
    out.residual = s.residual;
    out.iterations = s.iterations;
    out.mode_used = s.mode_used;
  }
  out.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (LogEnabled())
  {
    LogRecord({{"event", "solve"},
               {"frame", snapshot.frame_index},
               {"subcarrier", subcarrier},
               {"f_hz", k.f},
               {"n_voxels", snapshot.NumVoxels()},
               {"n_rhs", array.NumTx()},
               {"mode", ToString(out.mode_used)},
               {"iterations", out.iterations},
               {"residual", out.residual},
               {"wall_s", out.wall_seconds}});
  }
  return out;
}

CVec3 ScatteredField(const ScattererSnapshot &snapshot, const TransferMatrices &transfer,
                     const Eigen::VectorXcd &excitation, const Vec3 &r_obs, const Wavenumber &k)
{
  snapshot.Validate();
  if (transfer.NumVoxels() != snapshot.NumVoxels() || transfer.fields.cols() != excitation.size())
  {
    Fail(ErrorCode::InvalidArgument, "scattered_field: transfer matrices do not match snapshot or excitation");
  }
  const double half = 0.5 * snapshot.Side();
  const Eigen::Matrix3d rot = snapshot.lattice ? snapshot.lattice->rotation : Eigen::Matrix3d::Identity();
  CVec3 e = CVec3::Zero();
  for (std::size_t n = 0; n < snapshot.NumVoxels(); ++n)
  {
    const Vec3 local = rot.transpose() * (r_obs - snapshot.centers[n]);
    if (local.cwiseAbs().maxCoeff() < half)
    {
      std::ostringstream msg;
      msg << "scattered_field: observation point lies inside voxel " << n;
      Fail(ErrorCode::Domain, msg.str());
    }
    const cdouble chi = ContrastAt(snapshot.materials[n], k);
    if (chi == 0.0)
    {
      continue;
    }
    e += DyadicGreen(r_obs, snapshot.centers[n], k) * (chi * (transfer.At(n) * excitation));
  }
  return (k.k0 * k.k0 * snapshot.delta_v) * e;
}

}  // namespace nfsim
