// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "core/em_kernels.hpp"

namespace nfsim
{

enum class PartTag : std::uint8_t
{
  Body,
  Wheel,
};

struct Material
{
  double eps_r = 1.0;
  double sigma = 0.0;  // S/m
  PartTag part = PartTag::Body;
  // |chi| is clipped to this magnitude when > 0 (lossy-dielectric stand-in for metal).
  double contrast_cap = 0.0;

  void Validate() const;
};

// chi = eps_r - 1 - j sigma / (omega eps0), optionally clipped in magnitude. Im(chi) <= 0.
cdouble ContrastAt(const Material &m, const Wavenumber &k);

enum class TargetClass : int
{
  Car = 0,
  Motorcycle = 1,
};

inline constexpr int kNumClasses = 2;
std::string ClassName(TargetClass c);
TargetClass ClassFromName(const std::string &name);

enum class BodyFill
{
  Shell,
  Solid,
};

struct BoxWheelLayout
{
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double wheelbase = 0.0;  // hub-to-hub along x
  double track = 0.0;      // hub-to-hub along y (0 puts both wheels of an axle on y = 0)
  double wheel_width = 0.0;
  std::size_t axles = 2;
  std::size_t wheels_per_axle = 2;
};

struct GeometryParams
{
  BoxWheelLayout car{4.5, 1.8, 1.5, 2.7, 1.8, 0.3, 2, 2};
  BoxWheelLayout motorcycle{2.1, 0.6, 1.1, 1.5, 0.0, 0.15, 2, 1};
  double wheel_radius = 0.3;
  BodyFill body_fill = BodyFill::Shell;
  Material body{1.0, 1.0e6, PartTag::Body, 50.0};
  Material wheel{3.0, 1.0e-4, PartTag::Wheel, 0.0};
};

struct WheelDescriptor
{
  Vec3 axis;    // unit, canonical frame
  Vec3 center;  // m
  double radius = 0.0;
  double width = 0.0;
};

// Canonical voxel template on the integer lattice pitch * (i, j, l), body box centered on
// the origin, forward = +x, lateral = +y, up = +z.
struct TargetModel
{
  TargetClass label = TargetClass::Car;
  double pitch = 0.0;
  std::vector<Vec3> positions;
  std::vector<Eigen::Vector3i> lattice_indices;
  std::vector<Material> materials;
  std::vector<int> wheel_of;  // -1 for body voxels
  std::vector<WheelDescriptor> wheels;
  Vec3 extent = Vec3::Zero();

  std::size_t NumVoxels() const { return positions.size(); }
  std::size_t NumWheelVoxels() const;
};

TargetModel BuildTarget(TargetClass label, const GeometryParams &params, double voxel_pitch);

struct ScenarioConfig
{
  double R0 = 20.0;           // m, range of the body center at frame 0
  double psi0_deg = 0.0;      // yaw; heading follows yaw
  double v = 0.0;             // m/s
  double azimuth_deg = 0.0;   // initial azimuth from boresight (+x) toward +y
  double z_center = 0.0;      // m
  std::size_t n_frames = 1;
  double dt = 0.01;           // s
  std::uint64_t rng_seed = 0;

  Eigen::Vector2d Heading() const;
  void Validate() const;
};

ScenarioConfig SampleScenario(std::uint64_t rng_seed, std::size_t n_frames = 8, double dt = 0.01);

// Regular-lattice description of voxel centers: center_n = origin + pitch * rotation * idx_n.
struct LatticeFrame
{
  Vec3 origin = Vec3::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double pitch = 0.0;
  std::vector<Eigen::Vector3i> indices;
};

struct ScattererSnapshot
{
  std::vector<Vec3> centers;
  double delta_v = 0.0;
  std::vector<Material> materials;
  std::vector<int> wheel_of;  // optional; empty when unknown
  std::size_t frame_index = 0;
  std::optional<LatticeFrame> lattice;

  std::size_t NumVoxels() const { return centers.size(); }
  double Side() const;
  void Validate() const;
};

// Axis-aligned lattice fit of arbitrary centers with the snapshot's own side length.
// Returns nullopt when any center is off the lattice.
std::optional<LatticeFrame> FitAxisLattice(const std::vector<Vec3> &centers, double pitch);

// Body voxels follow the yawed rigid trajectory; wheel voxels additionally spin about
// their hub by (v / r_wheel) * m * dt.
ScattererSnapshot Animate(const TargetModel &model, const ScenarioConfig &cfg, std::size_t frame);

// Single-cell or cube test targets used by calibration, validation and bench.
ScattererSnapshot MakeCubeSnapshot(const Vec3 &center, double side_length, std::size_t cells_per_side,
                                   const Material &material);

}  // namespace nfsim
