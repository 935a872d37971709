// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "core/channel_synth.hpp"
#include "core/error.hpp"
#include "core/features.hpp"
#include "core/log.hpp"
#include "core/parallel.hpp"

namespace nfsim
{

namespace fs = std::filesystem;

namespace
{

constexpr std::array<std::uint8_t, 4> kMagic{'N', 'F', 'S', 'T'};

// Seed-stream tags, fixed so datasets stay reproducible across versions.
constexpr std::uint64_t kTagScenario = 1;
constexpr std::uint64_t kTagNoise = 2;
constexpr std::uint64_t kTagLabels = 3;
constexpr std::uint64_t kTagSplit = 4;

void PutU16(std::vector<std::uint8_t> &out, std::uint16_t v)
{
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void PutU32(std::vector<std::uint8_t> &out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i)
  {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

std::uint16_t GetU16(const std::uint8_t *p)
{
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t GetU32(const std::uint8_t *p)
{
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::size_t FloatsPerElement(SampleDtype d)
{
  return d == SampleDtype::Complex64 ? 2 : 1;
}

std::size_t DimProduct(const std::vector<std::uint32_t> &dims)
{
  std::size_t n = 1;
  for (std::uint32_t d : dims)
  {
    n *= d;
  }
  return n;
}

std::vector<std::uint8_t> ReadAll(const fs::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    Fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteAll(const fs::path &path, const void *data, std::size_t n)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    Fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  }
  out.write(static_cast<const char *>(data), static_cast<std::streamsize>(n));
  out.close();
  if (!out)
  {
    Fail(ErrorCode::Io, "write to '" + path.string() + "' failed");
  }
}

// Unbiased draw in [0, n) from the raw 64-bit stream; portable across standard libraries.
std::uint64_t Below(std::mt19937_64 &rng, std::uint64_t n)
{
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit)
  {
    x = rng();
  }
  return x % n;
}

template <typename T>
void Shuffle(std::vector<T> &v, std::mt19937_64 &rng)
{
  for (std::size_t i = v.size(); i > 1; --i)
  {
    std::swap(v[i - 1], v[Below(rng, i)]);
  }
}

// floor(w_i / sum(w) * n) plus largest-remainder top-up; ties go to the lower index.
std::vector<std::size_t> Apportion(const std::vector<double> &weights, std::size_t n)
{
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<double> remainder(weights.size(), 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i)
  {
    const double exact = weights[i] / total * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b] + 1e-12;
  });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % order.size())
  {
    if (weights[order[i]] > 0.0)
    {
      ++counts[order[i]];
      ++assigned;
    }
  }
  return counts;
}

nlohmann::json ClassNames()
{
  nlohmann::json names = nlohmann::json::array();
  for (int c = 0; c < kNumClasses; ++c)
  {
    names.push_back(ClassName(static_cast<TargetClass>(c)));
  }
  return names;
}

}  // namespace

DatasetSample DatasetSample::FromComplex(const ComplexTensor &t, std::int32_t label, const nlohmann::json &metadata)
{
  DatasetSample s;
  s.dtype = SampleDtype::Complex64;
  for (std::size_t d : t.dims())
  {
    s.dims.push_back(static_cast<std::uint32_t>(d));
  }
  s.payload.reserve(2 * t.size());
  for (const auto &z : t.data())
  {
    s.payload.push_back(static_cast<float>(z.real()));
    s.payload.push_back(static_cast<float>(z.imag()));
  }
  s.label = label;
  s.metadata = metadata.dump();
  return s;
}

DatasetSample DatasetSample::FromReal(const RealTensor &t, std::int32_t label, const nlohmann::json &metadata)
{
  DatasetSample s;
  s.dtype = SampleDtype::Float32;
  for (std::size_t d : t.dims())
  {
    s.dims.push_back(static_cast<std::uint32_t>(d));
  }
  s.payload.reserve(t.size());
  for (double x : t.data())
  {
    s.payload.push_back(static_cast<float>(x));
  }
  s.label = label;
  s.metadata = metadata.dump();
  return s;
}

std::size_t DatasetSample::ElementCount() const
{
  return DimProduct(dims);
}

ComplexTensor DatasetSample::ToComplex() const
{
  if (dtype != SampleDtype::Complex64)
  {
    Fail(ErrorCode::Format, "sample holds float32 data, not complex64");
  }
  std::vector<std::size_t> d(dims.begin(), dims.end());
  ComplexTensor t(d);
  for (std::size_t i = 0; i < t.size(); ++i)
  {
    t.data()[i] = {payload[2 * i], payload[2 * i + 1]};
  }
  return t;
}

RealTensor DatasetSample::ToReal() const
{
  if (dtype != SampleDtype::Float32)
  {
    Fail(ErrorCode::Format, "sample holds complex64 data, not float32");
  }
  std::vector<std::size_t> d(dims.begin(), dims.end());
  return RealTensor(d, std::vector<double>(payload.begin(), payload.end()));
}

nlohmann::json DatasetSample::Metadata() const
{
  return nlohmann::json::parse(metadata);
}

std::vector<std::uint8_t> EncodeSample(const DatasetSample &s)
{
  if (s.dims.empty() || s.dims.size() > kMaxSampleRank)
  {
    Fail(ErrorCode::InvalidArgument, "sample rank must be 1..5");
  }
  if (s.dtype != SampleDtype::Complex64 && s.dtype != SampleDtype::Float32)
  {
    Fail(ErrorCode::InvalidArgument, "unknown sample dtype");
  }
  if (s.payload.size() != s.ElementCount() * FloatsPerElement(s.dtype))
  {
    Fail(ErrorCode::InvalidArgument, "sample payload length does not match dims");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kSampleHeaderBytes + s.metadata.size() + 4 * s.payload.size());
  for (std::uint8_t c : kMagic)
  {
    out.push_back(c);
  }
  PutU16(out, kSampleFormatVersion);
  PutU16(out, static_cast<std::uint16_t>(s.dtype));
  PutU32(out, static_cast<std::uint32_t>(s.dims.size()));
  for (std::size_t i = 0; i < kMaxSampleRank; ++i)
  {
    PutU32(out, i < s.dims.size() ? s.dims[i] : 0u);
  }
  PutU32(out, std::bit_cast<std::uint32_t>(s.label));
  PutU32(out, static_cast<std::uint32_t>(s.metadata.size()));
  out.insert(out.end(), s.metadata.begin(), s.metadata.end());
  for (float f : s.payload)
  {
    PutU32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

DatasetSample DecodeSample(const std::vector<std::uint8_t> &bytes, const std::string &source)
{
  auto fail = [&](const std::string &what) { Fail(ErrorCode::Format, source + ": " + what); };
  if (bytes.size() < kSampleHeaderBytes)
  {
    fail("truncated header: expected " + std::to_string(kSampleHeaderBytes) + " bytes, got " +
         std::to_string(bytes.size()));
  }
  const std::uint8_t *p = bytes.data();
  if (!std::equal(kMagic.begin(), kMagic.end(), p))
  {
    fail("bad magic (not an nfsim sample)");
  }
  const std::uint16_t version = GetU16(p + 4);
  if (version != kSampleFormatVersion)
  {
    fail("unsupported format version " + std::to_string(version) + " (expected " +
         std::to_string(kSampleFormatVersion) + ")");
  }
  DatasetSample s;
  const std::uint16_t dtype = GetU16(p + 6);
  if (dtype != static_cast<std::uint16_t>(SampleDtype::Complex64) &&
      dtype != static_cast<std::uint16_t>(SampleDtype::Float32))
  {
    fail("unknown dtype code " + std::to_string(dtype));
  }
  s.dtype = static_cast<SampleDtype>(dtype);
  const std::uint32_t rank = GetU32(p + 8);
  if (rank < 1 || rank > kMaxSampleRank)
  {
    fail("bad rank " + std::to_string(rank) + " (expected 1..5)");
  }
  for (std::uint32_t i = 0; i < kMaxSampleRank; ++i)
  {
    const std::uint32_t d = GetU32(p + 12 + 4 * i);
    if (i < rank)
    {
      if (d == 0)
      {
        fail("bad dims: axis " + std::to_string(i) + " has length 0");
      }
      s.dims.push_back(d);
    }
    else if (d != 0)
    {
      fail("bad dims: unused slot " + std::to_string(i) + " is nonzero");
    }
  }
  s.label = std::bit_cast<std::int32_t>(GetU32(p + 32));
  const std::uint32_t meta_len = GetU32(p + 36);

  // Saturating size arithmetic: hostile dims must not wrap around to a small byte count.
  constexpr std::uint64_t kHuge = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t floats = FloatsPerElement(s.dtype);
  for (std::uint32_t d : s.dims)
  {
    floats = floats > kHuge / d ? kHuge : floats * d;
  }
  const std::uint64_t expected =
      floats > (kHuge - kSampleHeaderBytes - meta_len) / 4 ? kHuge : kSampleHeaderBytes + meta_len + 4 * floats;
  if (expected > bytes.size())
  {
    std::ostringstream msg;
    msg << "truncated file: expected " << expected << " bytes, got " << bytes.size();
    fail(msg.str());
  }
  if (expected < bytes.size())
  {
    std::ostringstream msg;
    msg << "header dims inconsistent with payload length: dims imply " << expected
        << " bytes, file has " << bytes.size();
    fail(msg.str());
  }
  s.metadata.assign(reinterpret_cast<const char *>(p + kSampleHeaderBytes), meta_len);
  const std::uint8_t *q = p + kSampleHeaderBytes + meta_len;
  s.payload.resize(static_cast<std::size_t>(floats));
  for (std::size_t i = 0; i < s.payload.size(); ++i)
  {
    s.payload[i] = std::bit_cast<float>(GetU32(q + 4 * i));
  }
  return s;
}

void WriteSample(const fs::path &path, const DatasetSample &sample)
{
  const auto bytes = EncodeSample(sample);
  WriteAll(path, bytes.data(), bytes.size());
}

DatasetSample ReadSample(const fs::path &path)
{
  return DecodeSample(ReadAll(path), path.string());
}

std::string SampleRelativePath(std::size_t id)
{
  std::ostringstream s;
  s << "samples/" << std::setw(6) << std::setfill('0') << id << ".bin";
  return s.str();
}

std::string ToString(Split s)
{
  switch (s)
  {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "?";
}

std::vector<Split> SplitDataset(const std::vector<int> &labels, const SplitRatios &ratios, std::uint64_t seed)
{
  ratios.Validate();
  const auto r = ratios.AsArray();
  const std::size_t nonzero = static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](double x) { return x > 0.0; }));
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    members[labels[i]].push_back(i);
  }
  std::vector<Split> out(labels.size(), Split::Train);
  for (auto &[label, idx] : members)
  {
    if (idx.size() < nonzero)
    {
      std::ostringstream msg;
      msg << "split: class " << label << " has " << idx.size() << " samples, fewer than the " << nonzero
          << " requested splits";
      Fail(ErrorCode::InvalidArgument, msg.str());
    }
    const auto counts = Apportion({r[0], r[1], r[2]}, idx.size());
    std::mt19937_64 rng(DeriveSeed(seed, {kTagSplit, static_cast<std::uint64_t>(label)}));
    Shuffle(idx, rng);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s)
    {
      for (std::size_t j = 0; j < counts[static_cast<std::size_t>(s)]; ++j)
      {
        out[idx[pos++]] = static_cast<Split>(s);
      }
    }
  }
  return out;
}

void SplitManifest(nlohmann::json &manifest, const SplitRatios &ratios, std::uint64_t seed)
{
  std::vector<int> labels;
  for (const auto &s : manifest.at("samples"))
  {
    labels.push_back(s.at("label").get<int>());
  }
  const auto splits = SplitDataset(labels, ratios, seed);
  std::array<std::size_t, 3> counts{};
  for (std::size_t i = 0; i < splits.size(); ++i)
  {
    manifest["samples"][i]["split"] = ToString(splits[i]);
    ++counts[static_cast<std::size_t>(splits[i])];
  }
  manifest["splits"] = {{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}};
  manifest["split_ratios"] = {{"train", ratios.train}, {"val", ratios.val}, {"test", ratios.test}};
  manifest["split_seed"] = seed;
}

nlohmann::json ReadManifest(const fs::path &root)
{
  const fs::path path = root / "manifest";
  if (!fs::exists(path))
  {
    Fail(ErrorCode::Io, "no dataset at '" + root.string() + "' (missing manifest)");
  }
  const auto bytes = ReadAll(path);
  try
  {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  }
  catch (const nlohmann::json::exception &e)
  {
    Fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

void WriteManifest(const fs::path &root, const nlohmann::json &manifest)
{
  const std::string text = manifest.dump(2) + "\n";
  WriteAll(root / "manifest", text.data(), text.size());
}

void VerifyDataset(const fs::path &root)
{
  const nlohmann::json m = ReadManifest(root);
  auto fail = [&](const std::string &what) { Fail(ErrorCode::Format, root.string() + ": " + what); };
  try
  {
    const auto dims = m.at("dims").get<std::vector<std::uint32_t>>();
    const std::string dtype = m.at("dtype").get<std::string>();
    const auto &samples = m.at("samples");
    if (samples.size() != m.at("sample_count").get<std::size_t>())
    {
      fail("manifest sample_count disagrees with its sample list");
    }
    std::set<std::string> listed;
    for (const auto &entry : samples)
    {
      const std::string rel = entry.at("file").get<std::string>();
      listed.insert(fs::path(rel).filename().string());
      const DatasetSample s = ReadSample(root / rel);
      if (s.dims != dims)
      {
        fail(rel + ": dims differ from the manifest");
      }
      if ((s.dtype == SampleDtype::Complex64) != (dtype == "complex64"))
      {
        fail(rel + ": dtype differs from the manifest");
      }
      if (s.label != entry.at("label").get<int>())
      {
        fail(rel + ": label differs from the manifest");
      }
    }
    std::size_t on_disk = 0;
    if (fs::exists(root / "samples"))
    {
      for (const auto &f : fs::directory_iterator(root / "samples"))
      {
        if (f.path().extension() == ".bin")
        {
          ++on_disk;
          if (!listed.count(f.path().filename().string()))
          {
            fail("unlisted sample file " + f.path().filename().string());
          }
        }
      }
    }
    if (on_disk != samples.size())
    {
      fail("manifest lists " + std::to_string(samples.size()) + " samples, " + std::to_string(on_disk) +
           " files on disk");
    }
  }
  catch (const nlohmann::json::exception &e)
  {
    fail(std::string("malformed manifest: ") + e.what());
  }
}

std::string DatasetHash(const fs::path &root)
{
  const nlohmann::json m = ReadManifest(root);
  std::string all;
  const auto manifest_bytes = ReadAll(root / "manifest");
  all.append(manifest_bytes.begin(), manifest_bytes.end());
  for (const auto &entry : m.at("samples"))
  {
    const auto bytes = ReadAll(root / entry.at("file").get<std::string>());
    all.append(bytes.begin(), bytes.end());
  }
  return Sha256Hex(all);
}

GenerateReport GenerateDataset(const RunConfig &cfg, const fs::path &root)
{
  cfg.Validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::error_code ec;
  fs::create_directories(root / "samples", ec);
  if (ec)
  {
    Fail(ErrorCode::Io, "cannot create '" + (root / "samples").string() + "': " + ec.message());
  }
  const std::regex ours(R"(\d{6}\.bin)");
  for (const auto &f : fs::directory_iterator(root / "samples"))
  {
    if (std::regex_match(f.path().filename().string(), ours))
    {
      fs::remove(f.path());
    }
  }

  const ArrayGeometry array = MakeCrossArray(cfg.array);
  const SubcarrierPlan plan = cfg.Plan();
  const double calibration =
      CalibrationPower(array, plan, cfg.solver, cfg.Noise(0), cfg.voxel_pitch);
  const double sigma_h = cfg.noise_enabled ? CalibrateNoise(cfg.Noise(0), calibration) : 0.0;

  std::vector<TargetModel> models;
  for (int c = 0; c < kNumClasses; ++c)
  {
    models.push_back(BuildTarget(static_cast<TargetClass>(c), cfg.geometry, cfg.voxel_pitch));
  }

  // Exact class counts from the mix, then a seeded shuffle of the label sequence.
  const auto per_class = Apportion(std::vector<double>(cfg.class_mix.begin(), cfg.class_mix.end()), cfg.n_samples);
  std::vector<int> labels;
  for (int c = 0; c < kNumClasses; ++c)
  {
    labels.insert(labels.end(), per_class[static_cast<std::size_t>(c)], c);
  }
  std::mt19937_64 label_rng(DeriveSeed(cfg.master_seed, {kTagLabels}));
  Shuffle(labels, label_rng);

  struct Outcome
  {
    bool ok = false;
    std::string error;
    DwellDiagnostics diagnostics;
  };
  std::vector<Outcome> outcomes(cfg.n_samples);
  const std::string hash = ConfigHash(cfg);

  ParallelFor(cfg.n_samples, [&](std::size_t i) {
    const std::uint64_t scenario_seed = DeriveSeed(cfg.master_seed, {kTagScenario, i});
    const std::uint64_t noise_seed = DeriveSeed(cfg.master_seed, {kTagNoise, i});
    try
    {
      const ScenarioConfig scenario = SampleScenario(scenario_seed, cfg.n_frames, cfg.dt);
      const TargetModel &model = models[static_cast<std::size_t>(labels[i])];
      DwellResult dwell = SimulateDwell(model, scenario, array, plan, cfg.solver, cfg.Noise(noise_seed), sigma_h);
      const RealFeatureTensor normalized = Normalize(ToReal(dwell.tensor));

      nlohmann::json meta = std::move(dwell.metadata);
      meta["sample_id"] = i;
      meta["seeds"] = {{"master", cfg.master_seed}, {"scenario", scenario_seed}, {"noise", noise_seed}};
      meta["normalization"] = {{"M", normalized.scale}, {"degenerate", normalized.degenerate}};
      meta["config_hash"] = hash;

      DatasetSample sample;
      if (cfg.sample_format == SampleFormat::RawComplex)
      {
        meta["layout"] = "N_r,N_t,K_sel,N_p";
        sample = DatasetSample::FromComplex(dwell.tensor, labels[i], meta);
      }
      else
      {
        meta["layout"] = "C,N_r,N_t,N_p,K_sel";
        sample = DatasetSample::FromReal(normalized.u, labels[i], meta);
      }
      WriteSample(root / SampleRelativePath(i), sample);
      outcomes[i].ok = true;
      outcomes[i].diagnostics = dwell.diagnostics;
    }
    catch (const Error &e)
    {
      if (e.code() == ErrorCode::Io)
      {
        throw;
      }
      outcomes[i].error = e.what();
      if (LogEnabled())
      {
        LogRecord({{"event", "sample_failed"}, {"id", i}, {"error", e.what()}});
      }
    }
  });

  GenerateReport report;
  report.requested = cfg.n_samples;
  report.sigma_h = sigma_h;
  nlohmann::json samples = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.n_samples; ++i)
  {
    if (!outcomes[i].ok)
    {
      report.failures.push_back({i, outcomes[i].error});
      failures.push_back({{"id", i}, {"error", outcomes[i].error}});
      continue;
    }
    samples.push_back({{"id", i}, {"file", SampleRelativePath(i)}, {"label", labels[i]}});
    ++report.written;
    ++report.class_counts[static_cast<std::size_t>(labels[i])];
    report.total_iterations += outcomes[i].diagnostics.total_iterations;
    report.max_residual = std::max(report.max_residual, outcomes[i].diagnostics.max_residual);
  }

  const std::size_t n_r = cfg.array.n_rx;
  const std::size_t n_t = cfg.array.n_tx;
  const std::size_t k_sel = plan.Count();
  const std::size_t n_p = cfg.n_frames;
  nlohmann::json class_counts = nlohmann::json::object();
  for (int c = 0; c < kNumClasses; ++c)
  {
    class_counts[ClassName(static_cast<TargetClass>(c))] = report.class_counts[static_cast<std::size_t>(c)];
  }
  nlohmann::json m = {
      {"format", "nfsim-dataset"},
      {"format_version", kSampleFormatVersion},
      {"n_r", n_r},
      {"n_t", n_t},
      {"k_sel", k_sel},
      {"n_p", n_p},
      {"n_classes", kNumClasses},
      {"class_names", ClassNames()},
      {"sample_format", ToString(cfg.sample_format)},
      {"dtype", cfg.sample_format == SampleFormat::RawComplex ? "complex64" : "float32"},
      {"dims", cfg.sample_format == SampleFormat::RawComplex ? std::vector<std::size_t>{n_r, n_t, k_sel, n_p}
                                                             : std::vector<std::size_t>{2, n_r, n_t, n_p, k_sel}},
      {"requested_samples", cfg.n_samples},
      {"sample_count", report.written},
      {"class_counts", class_counts},
      {"samples", samples},
      {"failures", failures},
      {"config_hash", hash},
      {"master_seed", cfg.master_seed},
      {"subcarrier_indices", plan.indices},
      {"frequencies_hz", plan.Frequencies()},
      {"noise", {{"enabled", cfg.noise_enabled}, {"snr_db", cfg.snr_db}, {"sigma_h", sigma_h},
                 {"calibration_power", calibration}}},
  };
  if (report.written > 0)
  {
    try
    {
      SplitManifest(m, cfg.split, DeriveSeed(cfg.master_seed, {kTagSplit}));
    }
    catch (const Error &e)
    {
      // Too few survivors for a stratified split; everything stays in train and the reason is kept.
      for (auto &s : m["samples"])
      {
        s["split"] = "train";
      }
      m["splits"] = {{"train", report.written}, {"val", 0}, {"test", 0}};
      m["split_error"] = e.what();
    }
  }
  WriteManifest(root, m);
  const std::string dump = DumpRunConfig(cfg);
  WriteAll(root / "config.ini", dump.data(), dump.size());

  report.manifest = std::move(m);
  report.summary_hash = DatasetHash(root);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

FeatureMode FeatureModeFromString(const std::string &s)
{
  if (s == "stf_input")
  {
    return FeatureMode::StfInput;
  }
  if (s == "fft4d")
  {
    return FeatureMode::Fft4d;
  }
  Fail(ErrorCode::InvalidArgument, "unknown feature mode '" + s + "' (stf_input | fft4d)");
}

std::string ToString(FeatureMode m)
{
  return m == FeatureMode::StfInput ? "stf_input" : "fft4d";
}

FeatureReport FeaturizeDataset(const fs::path &dataset, FeatureMode mode, const fs::path &out, std::size_t pad_factor)
{
  nlohmann::json manifest = ReadManifest(dataset);
  std::error_code ec;
  fs::create_directories(out / "samples", ec);
  if (!ec && mode == FeatureMode::Fft4d)
  {
    fs::create_directories(out / "csv", ec);
  }
  if (ec)
  {
    Fail(ErrorCode::Io, "cannot create '" + out.string() + "': " + ec.message());
  }
  const auto &entries = manifest.at("samples");
  std::vector<std::vector<std::uint32_t>> dims(entries.size());

  ParallelFor(entries.size(), [&](std::size_t i) {
    const auto &entry = entries[i];
    const std::string rel = entry.at("file").get<std::string>();
    const DatasetSample in = ReadSample(dataset / rel);
    // Raw complex samples are reduced tensors; feature-format samples are converted back.
    ComplexTensor reduced;
    if (in.dtype == SampleDtype::Complex64)
    {
      reduced = in.ToComplex();
    }
    else
    {
      RealFeatureTensor f;
      f.u = in.ToReal();
      reduced = FromReal(f);
    }
    nlohmann::json meta = in.Metadata();
    DatasetSample sample;
    if (mode == FeatureMode::StfInput)
    {
      const RealFeatureTensor u = Normalize(ToReal(reduced));
      meta["normalization"] = {{"M", u.scale}, {"degenerate", u.degenerate}};
      meta["layout"] = "C,N_r,N_t,N_p,K_sel";
      sample = DatasetSample::FromReal(u.u, in.label, meta);
    }
    else
    {
      Fft4dOptions opts;
      opts.pad_factor = pad_factor;
      const RealTensor map = Fft4dFeatures(reduced, opts);
      meta["layout"] = "doppler_bin,range_bin (DC-centered)";
      meta["fft4d_pad_factor"] = pad_factor;
      sample = DatasetSample::FromReal(map, in.label, meta);
      const std::string csv = Fft4dMapCsv(map);
      WriteAll(out / "csv" / (fs::path(rel).stem().string() + ".csv"), csv.data(), csv.size());
    }
    WriteSample(out / rel, sample);
    dims[i] = sample.dims;
  });

  FeatureReport report;
  report.samples = entries.size();
  if (!dims.empty())
  {
    report.dims = dims.front();
  }
  manifest["dims"] = report.dims;
  manifest["dtype"] = "float32";
  manifest["sample_format"] = ToString(mode);
  if (mode == FeatureMode::Fft4d)
  {
    manifest["fft4d_pad_factor"] = pad_factor;
  }
  WriteManifest(out, manifest);
  return report;
}

}  // namespace nfsim
