// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <system_error>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include "core/error.hpp"

namespace nfsim
{

namespace
{

std::string Trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
  {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string Lower(std::string s)
{
  for (char &c : s)
  {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

// Thrown by value parsers; the caller adds section/key/line context.
struct BadValue
{
  std::string what;
};

double ParseDouble(const std::string &v)
{
  double x = 0.0;
  const char *end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x))
  {
    throw BadValue{"expected a finite number, got '" + v + "'"};
  }
  return x;
}

std::uint64_t ParseUnsigned(const std::string &v)
{
  std::uint64_t x = 0;
  const char *end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end)
  {
    throw BadValue{"expected a non-negative integer, got '" + v + "'"};
  }
  return x;
}

bool ParseBool(const std::string &v)
{
  const std::string l = Lower(v);
  if (l == "true" || l == "1" || l == "yes" || l == "on")
  {
    return true;
  }
  if (l == "false" || l == "0" || l == "no" || l == "off")
  {
    return false;
  }
  throw BadValue{"expected true/false, got '" + v + "'"};
}

Vec3 ParseAxis(const std::string &v)
{
  const std::string l = Lower(v);
  if (l == "x")
  {
    return Vec3::UnitX();
  }
  if (l == "y")
  {
    return Vec3::UnitY();
  }
  if (l == "z")
  {
    return Vec3::UnitZ();
  }
  throw BadValue{"expected one of x, y, z, got '" + v + "'"};
}

std::string AxisName(const Vec3 &a)
{
  if (a == Vec3::UnitX())
  {
    return "x";
  }
  if (a == Vec3::UnitY())
  {
    return "y";
  }
  return "z";
}

std::string FormatDouble(double x)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::vector<std::size_t> ParseIndexList(const std::string &v)
{
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    out.push_back(static_cast<std::size_t>(ParseUnsigned(Trim(item))));
  }
  if (out.empty())
  {
    throw BadValue{"expected a comma-separated index list"};
  }
  return out;
}

std::string FormatIndexList(const std::vector<std::size_t> &v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    s += (i ? "," : "") + std::to_string(v[i]);
  }
  return s;
}

std::array<double, kNumClasses> ParseClassMix(const std::string &v)
{
  std::array<double, kNumClasses> mix{};
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
    {
      throw BadValue{"expected class:weight pairs, got '" + Trim(item) + "'"};
    }
    TargetClass c;
    try
    {
      c = ClassFromName(Trim(item.substr(0, colon)));
    }
    catch (const Error &e)
    {
      throw BadValue{e.what()};
    }
    mix[static_cast<std::size_t>(c)] = ParseDouble(Trim(item.substr(colon + 1)));
  }
  return mix;
}

std::string FormatClassMix(const std::array<double, kNumClasses> &mix)
{
  std::string s;
  for (int c = 0; c < kNumClasses; ++c)
  {
    s += (c ? "," : "") + ClassName(static_cast<TargetClass>(c)) + ":" + FormatDouble(mix[static_cast<std::size_t>(c)]);
  }
  return s;
}

template <typename F>
auto Wrap(F &&f)
{
  // Re-raise library enum parse errors as BadValue.
  return [f = std::forward<F>(f)](RunConfig &c, const std::string &v) {
    try
    {
      f(c, v);
    }
    catch (const Error &e)
    {
      throw BadValue{e.what()};
    }
  };
}

struct KeySpec
{
  std::string section;
  std::string key;
  std::string help;
  std::function<void(RunConfig &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> get;
};

const std::vector<KeySpec> &Schema()
{
  static const std::vector<KeySpec> schema = [] {
    std::vector<KeySpec> s;
    auto add = [&](std::string sec, std::string key, std::string help, auto set, auto get) {
      s.push_back({std::move(sec), std::move(key), std::move(help), Wrap(set), get});
    };
    add("run", "n_samples", "number of dwells to generate",
        [](RunConfig &c, const std::string &v) { c.n_samples = ParseUnsigned(v); },
        [](const RunConfig &c) { return std::to_string(c.n_samples); });
    add("run", "master_seed", "root of every per-sample seed",
        [](RunConfig &c, const std::string &v) { c.master_seed = ParseUnsigned(v); },
        [](const RunConfig &c) { return std::to_string(c.master_seed); });
    add("run", "class_mix", "class:weight pairs, e.g. car:0.5,motorcycle:0.5",
        [](RunConfig &c, const std::string &v) { c.class_mix = ParseClassMix(v); },
        [](const RunConfig &c) { return FormatClassMix(c.class_mix); });
    add("run", "sample_format", "raw_complex | features",
        [](RunConfig &c, const std::string &v) { c.sample_format = SampleFormatFromString(v); },
        [](const RunConfig &c) { return ToString(c.sample_format); });

    add("array", "n_tx", "transmit elements",
        [](RunConfig &c, const std::string &v) { c.array.n_tx = ParseUnsigned(v); },
        [](const RunConfig &c) { return std::to_string(c.array.n_tx); });
    add("array", "n_rx", "receive elements",
        [](RunConfig &c, const std::string &v) { c.array.n_rx = ParseUnsigned(v); },
        [](const RunConfig &c) { return std::to_string(c.array.n_rx); });
    add("array", "carrier_hz", "carrier frequency; sets the half-wavelength spacing",
        [](RunConfig &c, const std::string &v) { c.array.carrier_hz = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.array.carrier_hz); });
    add("array", "tx_moment_axis", "x | y | z",
        [](RunConfig &c, const std::string &v) { c.array.tx_moment_axis = ParseAxis(v); },
        [](const RunConfig &c) { return AxisName(c.array.tx_moment_axis); });
    add("array", "tx_moment_magnitude", "dipole moment, C m",
        [](RunConfig &c, const std::string &v) { c.array.tx_moment_magnitude = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.array.tx_moment_magnitude); });
    add("array", "rx_polarization", "x | y | z",
        [](RunConfig &c, const std::string &v) { c.array.rx_polarization = ParseAxis(v); },
        [](const RunConfig &c) { return AxisName(c.array.rx_polarization); });

    add("ofdm", "n_subcarriers", "OFDM grid size K",
        [](RunConfig &c, const std::string &v) { c.n_subcarriers = ParseUnsigned(v); },
        [](const RunConfig &c) { return std::to_string(c.n_subcarriers); });
    add("ofdm", "spacing_hz", "subcarrier spacing",
        [](RunConfig &c, const std::string &v) { c.spacing_hz = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.spacing_hz); });
    add("ofdm", "sensing_indices", "comma-separated 0-based grid indices (K_sel of them)",
        [](RunConfig &c, const std::string &v) { c.sensing_indices = ParseIndexList(v); },
        [](const RunConfig &c) { return FormatIndexList(c.sensing_indices); });

    add("dwell", "n_frames", "slow-time frames N_p",
        [](RunConfig &c, const std::string &v) { c.n_frames = ParseUnsigned(v); },
        [](const RunConfig &c) { return std::to_string(c.n_frames); });
    add("dwell", "dt", "frame interval, s",
        [](RunConfig &c, const std::string &v) { c.dt = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.dt); });

    add("target", "voxel_pitch", "voxel side, m",
        [](RunConfig &c, const std::string &v) { c.voxel_pitch = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.voxel_pitch); });
    add("target", "body_fill", "shell | solid",
        [](RunConfig &c, const std::string &v) {
          const std::string l = Lower(v);
          if (l == "shell")
          {
            c.geometry.body_fill = BodyFill::Shell;
          }
          else if (l == "solid")
          {
            c.geometry.body_fill = BodyFill::Solid;
          }
          else
          {
            throw BadValue{"expected shell or solid, got '" + v + "'"};
          }
        },
        [](const RunConfig &c) { return std::string(c.geometry.body_fill == BodyFill::Shell ? "shell" : "solid"); });
    add("target", "wheel_radius", "m",
        [](RunConfig &c, const std::string &v) { c.geometry.wheel_radius = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.geometry.wheel_radius); });

    add("material", "body_eps_r", "body relative permittivity",
        [](RunConfig &c, const std::string &v) { c.geometry.body.eps_r = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.geometry.body.eps_r); });
    add("material", "body_sigma", "body conductivity, S/m",
        [](RunConfig &c, const std::string &v) { c.geometry.body.sigma = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.geometry.body.sigma); });
    add("material", "body_contrast_cap", "|chi| clip for the body, 0 = none",
        [](RunConfig &c, const std::string &v) { c.geometry.body.contrast_cap = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.geometry.body.contrast_cap); });
    add("material", "wheel_eps_r", "wheel relative permittivity",
        [](RunConfig &c, const std::string &v) { c.geometry.wheel.eps_r = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.geometry.wheel.eps_r); });
    add("material", "wheel_sigma", "wheel conductivity, S/m",
        [](RunConfig &c, const std::string &v) { c.geometry.wheel.sigma = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.geometry.wheel.sigma); });
    add("material", "wheel_contrast_cap", "|chi| clip for wheels, 0 = none",
        [](RunConfig &c, const std::string &v) { c.geometry.wheel.contrast_cap = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.geometry.wheel.contrast_cap); });

    add("solver", "mode", "auto | dense_direct | iterative_dense | iterative_fft",
        [](RunConfig &c, const std::string &v) { c.solver.mode = SolverModeFromString(v); },
        [](const RunConfig &c) { return ToString(c.solver.mode); });
    add("solver", "tolerance", "relative residual target",
        [](RunConfig &c, const std::string &v) { c.solver.tolerance = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.solver.tolerance); });
    add("solver", "max_iterations", "GMRES iteration cap",
        [](RunConfig &c, const std::string &v) { c.solver.max_iterations = ParseUnsigned(v); },
        [](const RunConfig &c) { return std::to_string(c.solver.max_iterations); });
    add("solver", "restart", "GMRES restart length",
        [](RunConfig &c, const std::string &v) { c.solver.restart = ParseUnsigned(v); },
        [](const RunConfig &c) { return std::to_string(c.solver.restart); });
    add("solver", "self_term", "static_only | static_plus_radiative",
        [](RunConfig &c, const std::string &v) { c.solver.self_term = SelfTermFromString(v); },
        [](const RunConfig &c) { return ToString(c.solver.self_term); });
    add("solver", "auto_dense_limit", "auto mode uses one LU up to this many voxels",
        [](RunConfig &c, const std::string &v) { c.solver.auto_dense_limit = ParseUnsigned(v); },
        [](const RunConfig &c) { return std::to_string(c.solver.auto_dense_limit); });
    add("solver", "max_side_wavelengths", "voxel side limit in wavelengths, 0 = unchecked",
        [](RunConfig &c, const std::string &v) { c.solver.max_side_wavelengths = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.solver.max_side_wavelengths); });

    add("noise", "enabled", "add receiver noise",
        [](RunConfig &c, const std::string &v) { c.noise_enabled = ParseBool(v); },
        [](const RunConfig &c) { return std::string(c.noise_enabled ? "true" : "false"); });
    add("noise", "snr_db", "SNR of the calibration target",
        [](RunConfig &c, const std::string &v) { c.snr_db = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.snr_db); });
    add("noise", "r_ref", "calibration range, m",
        [](RunConfig &c, const std::string &v) { c.r_ref = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.r_ref); });

    add("split", "train", "train fraction",
        [](RunConfig &c, const std::string &v) { c.split.train = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.split.train); });
    add("split", "val", "validation fraction",
        [](RunConfig &c, const std::string &v) { c.split.val = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.split.val); });
    add("split", "test", "test fraction",
        [](RunConfig &c, const std::string &v) { c.split.test = ParseDouble(v); },
        [](const RunConfig &c) { return FormatDouble(c.split.test); });
    return s;
  }();
  return schema;
}

const KeySpec *FindKey(const std::string &section, const std::string &key)
{
  for (const auto &k : Schema())
  {
    if (k.section == section && k.key == key)
    {
      return &k;
    }
  }
  return nullptr;
}

bool KnownSection(const std::string &section)
{
  for (const auto &k : Schema())
  {
    if (k.section == section)
    {
      return true;
    }
  }
  return false;
}

// Line of "key = ..." inside [section], for error context. 0 when not found.
std::size_t LineOf(const std::string &text, const std::string &section, const std::string &key)
{
  std::istringstream in(text);
  std::string line;
  std::string current;
  std::size_t n = 0;
  while (std::getline(in, line))
  {
    ++n;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#')
    {
      continue;
    }
    if (t.front() == '[' && t.back() == ']')
    {
      current = Trim(t.substr(1, t.size() - 2));
      if (key.empty() && current == section)
      {
        return n;
      }
      continue;
    }
    const auto eq = t.find('=');
    if (current == section && eq != std::string::npos && Trim(t.substr(0, eq)) == key)
    {
      return n;
    }
  }
  return 0;
}

}  // namespace

std::string ToString(SampleFormat f)
{
  return f == SampleFormat::RawComplex ? "raw_complex" : "features";
}

SampleFormat SampleFormatFromString(const std::string &s)
{
  if (s == "raw_complex")
  {
    return SampleFormat::RawComplex;
  }
  if (s == "features")
  {
    return SampleFormat::Features;
  }
  Fail(ErrorCode::Config, "unknown sample format '" + s + "' (raw_complex | features)");
}

void SplitRatios::Validate() const
{
  for (double r : AsArray())
  {
    if (!(r >= 0.0 && r <= 1.0))
    {
      Fail(ErrorCode::Config, "split: each ratio must lie in [0, 1]");
    }
  }
  if (std::abs(train + val + test - 1.0) > 1e-9)
  {
    Fail(ErrorCode::Config, "split: ratios must sum to 1");
  }
}

SubcarrierPlan RunConfig::Plan() const
{
  return SubcarrierPlan::Full(array.carrier_hz, spacing_hz, n_subcarriers).Select(sensing_indices);
}

NoiseConfig RunConfig::Noise(std::uint64_t seed) const
{
  NoiseConfig n;
  n.enabled = noise_enabled;
  n.target_snr_db = snr_db;
  n.R_ref = r_ref;
  n.rng_seed = seed;
  return n;
}

void RunConfig::Validate() const
{
  auto config_error = [](const std::string &what) { Fail(ErrorCode::Config, what); };
  if (n_samples < 1)
  {
    config_error("run.n_samples must be >= 1");
  }
  double mix_total = 0.0;
  for (double w : class_mix)
  {
    if (!(w >= 0.0))
    {
      config_error("run.class_mix weights must be >= 0");
    }
    mix_total += w;
  }
  if (!(mix_total > 0.0))
  {
    config_error("run.class_mix needs at least one positive weight");
  }
  if (array.n_tx < 1 || array.n_rx < 1 || !(array.carrier_hz > 0.0) || !(array.tx_moment_magnitude > 0.0))
  {
    config_error("array: need n_tx, n_rx >= 1 and positive carrier_hz and tx_moment_magnitude");
  }
  if (n_frames < 1 || !(dt > 0.0))
  {
    config_error("dwell: need n_frames >= 1 and dt > 0");
  }
  if (!(voxel_pitch > 0.0) || !(geometry.wheel_radius > 0.0))
  {
    config_error("target: voxel_pitch and wheel_radius must be positive");
  }
  if (!(r_ref > 0.0))
  {
    config_error("noise.r_ref must be positive");
  }
  try
  {
    const SubcarrierPlan plan = Plan();
    solver.Validate();
    geometry.body.Validate();
    geometry.wheel.Validate();
    if (solver.max_side_wavelengths > 0.0)
    {
      const double limit = solver.max_side_wavelengths * constants::c0 / plan.MaxFrequency();
      if (voxel_pitch > limit * (1.0 + 1e-12))
      {
        std::ostringstream msg;
        msg << "target.voxel_pitch " << voxel_pitch << " m exceeds " << solver.max_side_wavelengths
            << " wavelengths (" << limit << " m) at the highest sensing subcarrier";
        config_error(msg.str());
      }
    }
  }
  catch (const Error &e)
  {
    if (e.code() == ErrorCode::Config)
    {
      throw;
    }
    config_error(e.what());
  }
  split.Validate();
}

RunConfig DefaultRunConfig()
{
  RunConfig c;
  c.array.carrier_hz = 150e6;
  return c;
}

void SetConfigValue(RunConfig &cfg, const std::string &section, const std::string &key, const std::string &value)
{
  if (!KnownSection(section))
  {
    Fail(ErrorCode::Config, "unknown config section [" + section + "]");
  }
  const KeySpec *spec = FindKey(section, key);
  if (!spec)
  {
    Fail(ErrorCode::Config, "unknown config key '" + section + "." + key + "'");
  }
  try
  {
    spec->set(cfg, Trim(value));
  }
  catch (const BadValue &e)
  {
    Fail(ErrorCode::Config, "config key '" + section + "." + key + "': " + e.what);
  }
}

RunConfig ParseRunConfig(const std::string &ini_text, const std::string &source_name)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try
  {
    std::istringstream in(ini_text);
    pt::ini_parser::read_ini(in, tree);
  }
  catch (const pt::ini_parser_error &e)
  {
    std::ostringstream msg;
    msg << source_name << ":" << e.line() << ": " << e.message();
    Fail(ErrorCode::Config, msg.str());
  }
  RunConfig cfg = DefaultRunConfig();
  for (const auto &[section, body] : tree)
  {
    if (body.empty() && !body.data().empty())
    {
      const std::size_t line = LineOf(ini_text, "", section);
      Fail(ErrorCode::Config, source_name + ":" + std::to_string(line) + ": key '" + section +
                                  "' outside any section");
    }
    for (const auto &[key, value] : body)
    {
      try
      {
        SetConfigValue(cfg, section, key, value.data());
      }
      catch (const Error &e)
      {
        const std::size_t line = LineOf(ini_text, section, KnownSection(section) ? key : "");
        Fail(ErrorCode::Config, source_name + ":" + std::to_string(line) + ": " + e.what());
      }
    }
  }
  try
  {
    cfg.Validate();
  }
  catch (const Error &e)
  {
    Fail(ErrorCode::Config, source_name + ": " + e.what());
  }
  return cfg;
}

RunConfig LoadRunConfig(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    Fail(ErrorCode::Config, "cannot open config file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return ParseRunConfig(text.str(), path);
}

void ApplyOverride(RunConfig &cfg, const std::string &assignment)
{
  const auto eq = assignment.find('=');
  const std::string lhs = Trim(assignment.substr(0, eq));
  const auto dot = lhs.find('.');
  if (eq == std::string::npos || dot == std::string::npos)
  {
    Fail(ErrorCode::Config, "override '" + assignment + "' must have the form section.key=value");
  }
  SetConfigValue(cfg, lhs.substr(0, dot), lhs.substr(dot + 1), assignment.substr(eq + 1));
}

std::string DumpRunConfig(const RunConfig &cfg)
{
  std::ostringstream out;
  std::string section;
  for (const auto &k : Schema())
  {
    if (k.section != section)
    {
      out << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
      section = k.section;
    }
    out << k.key << " = " << k.get(cfg) << '\n';
  }
  return out.str();
}

std::string Sha256Hex(const std::string &bytes)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
  {
    Fail(ErrorCode::Internal, "SHA-256 digest failed");
  }
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i)
  {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string ConfigHash(const RunConfig &cfg)
{
  RunConfig c = cfg;
  c.master_seed = 0;
  return Sha256Hex(DumpRunConfig(c));
}

std::vector<ConfigKeyInfo> ConfigSchema()
{
  std::vector<ConfigKeyInfo> out;
  for (const auto &k : Schema())
  {
    out.push_back({k.section, k.key, k.help});
  }
  return out;
}

}  // namespace nfsim
