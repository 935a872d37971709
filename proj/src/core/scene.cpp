// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "core/error.hpp"

namespace nfsim
{

namespace
{

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool InBox(const Vec3 &p, const BoxWheelLayout &g, double tol)
{
  return std::abs(p.x()) <= 0.5 * g.length + tol && std::abs(p.y()) <= 0.5 * g.width + tol &&
         std::abs(p.z()) <= 0.5 * g.height + tol;
}

bool InWheel(const Vec3 &p, const WheelDescriptor &w, double tol)
{
  const Vec3 d = p - w.center;
  const double along = d.dot(w.axis);
  if (std::abs(along) > 0.5 * w.width + tol)
  {
    return false;
  }
  const double radial = (d - along * w.axis).norm();
  return radial <= w.radius + tol;
}

std::vector<WheelDescriptor> LayoutWheels(const BoxWheelLayout &g, double radius)
{
  std::vector<WheelDescriptor> wheels;
  for (std::size_t a = 0; a < g.axles; ++a)
  {
    const double x =
        g.axles > 1 ? g.wheelbase * (static_cast<double>(a) / static_cast<double>(g.axles - 1) - 0.5) : 0.0;
    for (std::size_t w = 0; w < g.wheels_per_axle; ++w)
    {
      const double y = g.wheels_per_axle > 1
                           ? g.track * (static_cast<double>(w) / static_cast<double>(g.wheels_per_axle - 1) - 0.5)
                           : 0.0;
      wheels.push_back({Vec3::UnitY(), Vec3(x, y, -0.5 * g.height), radius, g.wheel_width});
    }
  }
  return wheels;
}

Eigen::Matrix3d YawRotation(double psi_rad)
{
  return Eigen::AngleAxisd(psi_rad, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace

void Material::Validate() const
{
  if (!(eps_r >= 1.0) || !std::isfinite(eps_r))
  {
    Fail(ErrorCode::InvalidArgument, "material: eps_r must be >= 1");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
  {
    Fail(ErrorCode::InvalidArgument, "material: sigma must be >= 0");
  }
  if (!(contrast_cap >= 0.0))
  {
    Fail(ErrorCode::InvalidArgument, "material: contrast_cap must be >= 0");
  }
}

cdouble ContrastAt(const Material &m, const Wavenumber &k)
{
  cdouble chi(m.eps_r - 1.0, -m.sigma / (k.omega * constants::eps0));
  if (m.contrast_cap > 0.0 && std::abs(chi) > m.contrast_cap)
  {
    chi *= m.contrast_cap / std::abs(chi);
  }
  return chi;
}

std::string ClassName(TargetClass c)
{
  return c == TargetClass::Car ? "car" : "motorcycle";
}

TargetClass ClassFromName(const std::string &name)
{
  if (name == "car")
  {
    return TargetClass::Car;
  }
  if (name == "motorcycle")
  {
    return TargetClass::Motorcycle;
  }
  Fail(ErrorCode::InvalidArgument, "unknown target class '" + name + "'");
}

std::size_t TargetModel::NumWheelVoxels() const
{
  return static_cast<std::size_t>(std::count_if(wheel_of.begin(), wheel_of.end(), [](int w) { return w >= 0; }));
}

TargetModel BuildTarget(TargetClass label, const GeometryParams &params, double voxel_pitch)
{
  if (!(voxel_pitch > 0.0) || !std::isfinite(voxel_pitch))
  {
    Fail(ErrorCode::InvalidArgument, "build_target: voxel pitch must be positive");
  }
  params.body.Validate();
  params.wheel.Validate();
  const BoxWheelLayout &g = label == TargetClass::Car ? params.car : params.motorcycle;
  if (g.length <= 0.0 || g.width <= 0.0 || g.height <= 0.0 || g.wheel_width <= 0.0 || params.wheel_radius <= 0.0)
  {
    Fail(ErrorCode::InvalidArgument, "build_target: body and wheel dimensions must be positive");
  }

  TargetModel model;
  model.label = label;
  model.pitch = voxel_pitch;
  model.extent = Vec3(g.length, g.width, g.height);
  model.wheels = LayoutWheels(g, params.wheel_radius);

  Material body = params.body;
  body.part = PartTag::Body;
  Material wheel = params.wheel;
  wheel.part = PartTag::Wheel;

  // Bounding box of body and wheels in lattice units.
  Vec3 lo(-0.5 * g.length, -0.5 * g.width, -0.5 * g.height);
  Vec3 hi = -lo;
  for (const auto &w : model.wheels)
  {
    const Vec3 reach = Vec3::Constant(w.radius + 0.5 * w.width);
    lo = lo.cwiseMin(w.center - reach);
    hi = hi.cwiseMax(w.center + reach);
  }
  const double tol = 1e-9 * voxel_pitch;
  const Eigen::Vector3i imin = (lo / voxel_pitch).array().floor().cast<int>();
  const Eigen::Vector3i imax = (hi / voxel_pitch).array().ceil().cast<int>();

  std::vector<std::size_t> per_wheel(model.wheels.size(), 0);
  for (int i = imin.x(); i <= imax.x(); ++i)
  {
    for (int j = imin.y(); j <= imax.y(); ++j)
    {
      for (int l = imin.z(); l <= imax.z(); ++l)
      {
        const Eigen::Vector3i idx(i, j, l);
        const Vec3 p = voxel_pitch * idx.cast<double>();
        int wheel_id = -1;
        for (std::size_t w = 0; w < model.wheels.size(); ++w)
        {
          if (InWheel(p, model.wheels[w], tol))
          {
            wheel_id = static_cast<int>(w);
            break;
          }
        }
        if (wheel_id >= 0)
        {
          ++per_wheel[static_cast<std::size_t>(wheel_id)];
          model.positions.push_back(p);
          model.lattice_indices.push_back(idx);
          model.materials.push_back(wheel);
          model.wheel_of.push_back(wheel_id);
          continue;
        }
        if (!InBox(p, g, tol))
        {
          continue;
        }
        if (params.body_fill == BodyFill::Shell)
        {
          bool surface = false;
          for (int axis = 0; axis < 3 && !surface; ++axis)
          {
            for (int s : {-1, 1})
            {
              Vec3 q = p;
              q[axis] += s * voxel_pitch;
              if (!InBox(q, g, tol))
              {
                surface = true;
                break;
              }
            }
          }
          if (!surface)
          {
            continue;
          }
        }
        model.positions.push_back(p);
        model.lattice_indices.push_back(idx);
        model.materials.push_back(body);
        model.wheel_of.push_back(-1);
      }
    }
  }

  for (std::size_t w = 0; w < per_wheel.size(); ++w)
  {
    if (per_wheel[w] == 0)
    {
      std::ostringstream msg;
      msg << "build_target: voxel pitch " << voxel_pitch << " m leaves wheel " << w << " of " << ClassName(label)
          << " without voxels";
      Fail(ErrorCode::InvalidArgument, msg.str());
    }
  }
  return model;
}

Eigen::Vector2d ScenarioConfig::Heading() const
{
  const double psi = psi0_deg * kDegToRad;
  return {std::cos(psi), std::sin(psi)};
}

void ScenarioConfig::Validate() const
{
  auto bad = [](const std::string &what) { Fail(ErrorCode::InvalidArgument, "scenario: " + what); };
  if (!(R0 >= 5.0 && R0 <= 50.0))
  {
    bad("R0 must lie in [5, 50] m");
  }
  if (!(psi0_deg >= -180.0 && psi0_deg <= 180.0))
  {
    bad("psi0 must lie in [-180, 180] deg");
  }
  if (!(v >= 0.0 && v <= 15.0))
  {
    bad("v must lie in [0, 15] m/s");
  }
  if (!(std::abs(azimuth_deg) <= 60.0))
  {
    bad("initial azimuth must lie within +-60 deg of boresight");
  }
  if (n_frames == 0)
  {
    bad("n_frames must be >= 1");
  }
  if (!(dt > 0.0))
  {
    bad("dt must be positive");
  }
}

ScenarioConfig SampleScenario(std::uint64_t rng_seed, std::size_t n_frames, double dt)
{
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> range(5.0, 50.0);
  std::uniform_real_distribution<double> yaw(-180.0, 180.0);
  std::uniform_real_distribution<double> speed(0.0, 15.0);
  ScenarioConfig cfg;
  cfg.R0 = range(rng);
  cfg.psi0_deg = yaw(rng);
  cfg.v = speed(rng);
  double az = 0.0;
  do
  {
    az = yaw(rng);
  } while (std::abs(az) > 60.0);
  cfg.azimuth_deg = az;
  cfg.n_frames = n_frames;
  cfg.dt = dt;
  cfg.rng_seed = rng_seed;
  return cfg;
}

double ScattererSnapshot::Side() const
{
  return std::cbrt(delta_v);
}

void ScattererSnapshot::Validate() const
{
  if (centers.empty())
  {
    Fail(ErrorCode::InvalidArgument, "snapshot: needs at least one voxel");
  }
  if (!(delta_v > 0.0) || !std::isfinite(delta_v))
  {
    Fail(ErrorCode::InvalidArgument, "snapshot: voxel volume must be positive");
  }
  if (materials.size() != centers.size())
  {
    Fail(ErrorCode::InvalidArgument, "snapshot: one material per voxel required");
  }
  if (!wheel_of.empty() && wheel_of.size() != centers.size())
  {
    Fail(ErrorCode::InvalidArgument, "snapshot: wheel tags must cover every voxel");
  }
  for (const auto &c : centers)
  {
    if (!c.allFinite())
    {
      Fail(ErrorCode::InvalidArgument, "snapshot: non-finite voxel center");
    }
  }
  for (const auto &m : materials)
  {
    m.Validate();
  }
  if (lattice && lattice->indices.size() != centers.size())
  {
    Fail(ErrorCode::InvalidArgument, "snapshot: lattice indices must cover every voxel");
  }
}

std::optional<LatticeFrame> FitAxisLattice(const std::vector<Vec3> &centers, double pitch)
{
  if (centers.empty() || !(pitch > 0.0))
  {
    return std::nullopt;
  }
  Vec3 origin = centers.front();
  for (const auto &c : centers)
  {
    origin = origin.cwiseMin(c);
  }
  LatticeFrame frame;
  frame.origin = origin;
  frame.pitch = pitch;
  frame.indices.reserve(centers.size());
  for (const auto &c : centers)
  {
    const Vec3 u = (c - origin) / pitch;
    const Eigen::Vector3i idx = u.array().round().cast<int>();
    if ((u - idx.cast<double>()).cwiseAbs().maxCoeff() > 1e-6)
    {
      return std::nullopt;
    }
    frame.indices.push_back(idx);
  }
  return frame;
}

ScattererSnapshot Animate(const TargetModel &model, const ScenarioConfig &cfg, std::size_t frame)
{
  if (frame >= cfg.n_frames)
  {
    std::ostringstream msg;
    msg << "animate: frame " << frame << " outside dwell of " << cfg.n_frames << " frames";
    Fail(ErrorCode::InvalidArgument, msg.str());
  }
  const double t = static_cast<double>(frame) * cfg.dt;
  const double az = cfg.azimuth_deg * kDegToRad;
  const Eigen::Vector2d h = cfg.Heading();
  const Vec3 start(cfg.R0 * std::cos(az), cfg.R0 * std::sin(az), cfg.z_center);
  const Vec3 hub_origin = start + Vec3(h.x(), h.y(), 0.0) * (cfg.v * t);
  const Eigen::Matrix3d yaw = YawRotation(cfg.psi0_deg * kDegToRad);

  if (hub_origin.norm() < 1.0 || hub_origin.x() <= 0.0)
  {
    std::ostringstream msg;
    msg << "animate: trajectory leaves the valid region at frame " << frame << " (center at " << hub_origin.transpose()
        << " m)";
    Fail(ErrorCode::Domain, msg.str());
  }

  ScattererSnapshot snap;
  snap.delta_v = model.pitch * model.pitch * model.pitch;
  snap.materials = model.materials;
  snap.wheel_of = model.wheel_of;
  snap.frame_index = frame;
  snap.centers.reserve(model.NumVoxels());

  std::vector<Eigen::Matrix3d> spin;
  bool spun = false;
  for (const auto &w : model.wheels)
  {
    const double theta = cfg.v / w.radius * t;
    spun = spun || theta != 0.0;
    spin.push_back(Eigen::AngleAxisd(theta, w.axis).toRotationMatrix());
  }

  for (std::size_t n = 0; n < model.NumVoxels(); ++n)
  {
    Vec3 local = model.positions[n];
    const int w = model.wheel_of[n];
    if (w >= 0)
    {
      const auto &wd = model.wheels[static_cast<std::size_t>(w)];
      local = wd.center + spin[static_cast<std::size_t>(w)] * (local - wd.center);
    }
    const Vec3 world = hub_origin + yaw * local;
    if (world.x() <= 0.0)
    {
      std::ostringstream msg;
      msg << "animate: voxel " << n << " is behind the array at frame " << frame;
      Fail(ErrorCode::Domain, msg.str());
    }
    snap.centers.push_back(world);
  }

  if (!spun || model.NumWheelVoxels() == 0)
  {
    LatticeFrame lattice;
    lattice.origin = hub_origin;
    lattice.rotation = yaw;
    lattice.pitch = model.pitch;
    lattice.indices = model.lattice_indices;
    snap.lattice = std::move(lattice);
  }
  return snap;
}

ScattererSnapshot MakeCubeSnapshot(const Vec3 &center, double side_length, std::size_t cells_per_side,
                                   const Material &material)
{
  if (cells_per_side == 0 || !(side_length > 0.0))
  {
    Fail(ErrorCode::InvalidArgument, "cube snapshot: need positive size and at least one cell");
  }
  const double h = side_length / static_cast<double>(cells_per_side);
  const double half = 0.5 * static_cast<double>(cells_per_side - 1);
  ScattererSnapshot snap;
  snap.delta_v = h * h * h;
  LatticeFrame lattice;
  lattice.pitch = h;
  lattice.origin = center - Vec3::Constant(h * half);
  const int n = static_cast<int>(cells_per_side);
  for (int i = 0; i < n; ++i)
  {
    for (int j = 0; j < n; ++j)
    {
      for (int l = 0; l < n; ++l)
      {
        const Eigen::Vector3i idx(i, j, l);
        snap.centers.push_back(lattice.origin + h * idx.cast<double>());
        lattice.indices.push_back(idx);
        snap.materials.push_back(material);
      }
    }
  }
  snap.lattice = std::move(lattice);
  return snap;
}

}  // namespace nfsim
