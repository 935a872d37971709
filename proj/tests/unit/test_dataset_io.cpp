// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>

#include <doctest.h>

#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "core/features.hpp"

using namespace nfsim;
namespace fs = std::filesystem;

namespace
{

fs::path Scratch(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("nfsim_unit_dataset_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::uint8_t> Slurp(const fs::path &p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t U32(const std::vector<std::uint8_t> &b, std::size_t off)
{
  return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
         static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

void PutU32(std::vector<std::uint8_t> &b, std::size_t off, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i)
  {
    b[off + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
  }
}

std::string DecodeError(const std::vector<std::uint8_t> &bytes)
{
  try
  {
    DecodeSample(bytes, "probe.bin");
  }
  catch (const Error &e)
  {
    CHECK(e.code() == ErrorCode::Format);
    return e.what();
  }
  return "";
}

ComplexTensor RandomComplex(std::vector<std::size_t> dims, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  // float draws so the round trip is exact; gcc 11 -O3 folds away a double->float->double cast
  std::normal_distribution<float> g;
  ComplexTensor t(std::move(dims));
  for (auto &v : t.data())
  {
    const float re = g(rng);
    const float im = g(rng);
    v = cdouble(re, im);
  }
  return t;
}

RunConfig SmallConfig()
{
  RunConfig cfg = DefaultRunConfig();
  cfg.n_samples = 4;
  cfg.master_seed = 5;
  cfg.array.n_tx = 2;
  cfg.array.n_rx = 2;
  cfg.array.carrier_hz = 100e6;
  cfg.sensing_indices = {0, 32};
  cfg.n_frames = 2;
  cfg.voxel_pitch = 0.3;
  cfg.split = {1.0, 0.0, 0.0};
  return cfg;
}

}  // namespace

TEST_CASE("sample encoding")
{
  const ComplexTensor t = RandomComplex({2, 3, 4, 5}, 1);
  const nlohmann::json meta = {{"sample_id", 3}, {"note", "café"}};
  const DatasetSample s = DatasetSample::FromComplex(t, 1, meta);
  const std::vector<std::uint8_t> bytes = EncodeSample(s);

  SUBCASE("header layout")
  {
    const std::string meta_text = meta.dump();
    REQUIRE(bytes.size() == 40 + meta_text.size() + 4 * 2 * 120);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "NFST");
    CHECK((bytes[4] | bytes[5] << 8) == 1);
    CHECK((bytes[6] | bytes[7] << 8) == 1);
    CHECK(U32(bytes, 8) == 4);
    CHECK(U32(bytes, 12) == 2);
    CHECK(U32(bytes, 16) == 3);
    CHECK(U32(bytes, 20) == 4);
    CHECK(U32(bytes, 24) == 5);
    CHECK(U32(bytes, 28) == 0);
    CHECK(U32(bytes, 32) == 1);
    CHECK(U32(bytes, 36) == meta_text.size());
    CHECK(std::string(bytes.begin() + 40, bytes.begin() + 40 + static_cast<long>(meta_text.size())) == meta_text);
    // First payload pair is element (0, 0, 0, 0), real then imaginary.
    const std::size_t p = 40 + meta_text.size();
    CHECK(std::bit_cast<float>(U32(bytes, p)) == static_cast<float>(t(0, 0, 0, 0).real()));
    CHECK(std::bit_cast<float>(U32(bytes, p + 4)) == static_cast<float>(t(0, 0, 0, 0).imag()));
    CHECK(std::bit_cast<float>(U32(bytes, p + 8)) == static_cast<float>(t(0, 0, 0, 1).real()));
  }
  SUBCASE("bit-exact round trip")
  {
    const DatasetSample back = DecodeSample(bytes);
    CHECK(back == s);
    CHECK(back.ToComplex() == t);
    CHECK(back.Metadata() == meta);
    CHECK(EncodeSample(back) == bytes);

    RealTensor r({2, 2, 2, 3, 4});
    std::mt19937 rng(2);
    std::uniform_real_distribution<float> u(-1.0F, 1.0F);
    for (auto &v : r.data())
    {
      v = u(rng);
    }
    const DatasetSample rs = DatasetSample::FromReal(r, 0, nlohmann::json::object());
    const DatasetSample rb = DecodeSample(EncodeSample(rs));
    CHECK(rb.dtype == SampleDtype::Float32);
    CHECK(rb.ToReal() == r);
    CHECK_THROWS_AS(rb.ToComplex(), Error);
    CHECK_THROWS_AS(back.ToReal(), Error);
  }
  SUBCASE("file round trip")
  {
    const fs::path dir = Scratch("file");
    fs::create_directories(dir);
    WriteSample(dir / "a.bin", s);
    CHECK(Slurp(dir / "a.bin") == bytes);
    CHECK(ReadSample(dir / "a.bin") == s);
    try
    {
      ReadSample(dir / "missing.bin");
      FAIL("expected an error");
    }
    catch (const Error &e)
    {
      CHECK(e.code() == ErrorCode::Io);
    }
    fs::remove_all(dir);
  }
  SUBCASE("malformed files")
  {
    CHECK(DecodeError({bytes.begin(), bytes.begin() + 10}).find("truncated header: expected 40 bytes, got 10") !=
          std::string::npos);
    std::vector<std::uint8_t> short_payload(bytes.begin(), bytes.end() - 4);
    const std::string e1 = DecodeError(short_payload);
    CHECK(e1.find("truncated file: expected " + std::to_string(bytes.size()) + " bytes, got " +
                  std::to_string(bytes.size() - 4)) != std::string::npos);
    CHECK(e1.find("probe.bin") != std::string::npos);
    std::vector<std::uint8_t> longer = bytes;
    longer.push_back(0);
    CHECK(DecodeError(longer).find("header dims inconsistent with payload length") != std::string::npos);
    std::vector<std::uint8_t> dims = bytes;
    PutU32(dims, 24, 4);
    CHECK(DecodeError(dims).find("header dims inconsistent with payload length") != std::string::npos);
    std::vector<std::uint8_t> magic = bytes;
    magic[0] = 'X';
    CHECK(DecodeError(magic).find("magic") != std::string::npos);
    std::vector<std::uint8_t> version = bytes;
    version[4] = 2;
    CHECK(DecodeError(version).find("version 2") != std::string::npos);
    std::vector<std::uint8_t> dtype = bytes;
    dtype[6] = 3;
    CHECK(DecodeError(dtype).find("dtype") != std::string::npos);
    std::vector<std::uint8_t> rank = bytes;
    PutU32(rank, 8, 6);
    CHECK(DecodeError(rank).find("rank") != std::string::npos);
    std::vector<std::uint8_t> zero = bytes;
    PutU32(zero, 16, 0);
    CHECK(DecodeError(zero).find("length 0") != std::string::npos);
    std::vector<std::uint8_t> unused = bytes;
    PutU32(unused, 28, 7);
    CHECK(DecodeError(unused).find("unused slot") != std::string::npos);
  }
  CHECK(SampleRelativePath(42) == "samples/000042.bin");
}

TEST_CASE("stratified splits")
{
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i)
  {
    labels.push_back(i % 2);
  }
  const SplitRatios ratios;
  const std::vector<Split> a = SplitDataset(labels, ratios, 9);
  REQUIRE(a.size() == 100);
  for (int c = 0; c < 2; ++c)
  {
    std::array<int, 3> counts{};
    for (std::size_t i = 0; i < a.size(); ++i)
    {
      if (labels[i] == c)
      {
        ++counts[static_cast<std::size_t>(a[i])];
      }
    }
    CHECK(counts[0] == 35);
    CHECK(counts[1] >= 7);
    CHECK(counts[1] <= 8);
    CHECK(counts[1] + counts[2] == 15);
  }
  CHECK(SplitDataset(labels, ratios, 9) == a);
  CHECK(SplitDataset(labels, ratios, 10) != a);

  const std::vector<Split> all_train = SplitDataset(labels, {1.0, 0.0, 0.0}, 9);
  CHECK(std::all_of(all_train.begin(), all_train.end(), [](Split s) { return s == Split::Train; }));

  try
  {
    SplitDataset({0, 0, 0, 1, 1}, ratios, 1);
    FAIL("expected an error");
  }
  catch (const Error &e)
  {
    CHECK(std::string(e.what()).find("class 1 has 2 samples") != std::string::npos);
  }
  CHECK_THROWS_AS(SplitDataset(labels, {0.5, 0.5, 0.5}, 1), Error);

  nlohmann::json manifest = {{"samples", nlohmann::json::array()}};
  for (int i = 0; i < 20; ++i)
  {
    manifest["samples"].push_back({{"id", i}, {"label", i % 2}});
  }
  SplitManifest(manifest, ratios, 3);
  CHECK(manifest.at("splits").at("train") == 14);
  CHECK(manifest.at("split_seed") == 3);
  std::set<std::string> seen;
  for (const auto &s : manifest.at("samples"))
  {
    seen.insert(s.at("split").get<std::string>());
  }
  CHECK(seen == std::set<std::string>{"train", "val", "test"});
}

TEST_CASE("dataset generation")
{
  const RunConfig cfg = SmallConfig();
  const fs::path a = Scratch("gen_a");
  const GenerateReport ra = GenerateDataset(cfg, a);

  SUBCASE("layout, manifest and verification")
  {
    CHECK(ra.requested == 4);
    CHECK(ra.written == 4);
    CHECK(ra.failures.empty());
    CHECK(ra.class_counts[0] == 2);
    CHECK(ra.class_counts[1] == 2);
    CHECK(ra.sigma_h > 0.0);
    CHECK(fs::exists(a / "manifest"));
    CHECK(fs::exists(a / "config.ini"));
    const nlohmann::json m = ReadManifest(a);
    CHECK(m.at("dims") == std::vector<int>{2, 2, 2, 2});
    CHECK(m.at("dtype") == "complex64");
    CHECK(m.at("sample_count") == 4);
    CHECK(m.at("class_names") == std::vector<std::string>{"car", "motorcycle"});
    CHECK(m.at("config_hash") == ConfigHash(cfg));
    CHECK(m.at("splits").at("train") == 4);
    CHECK_NOTHROW(VerifyDataset(a));
    CHECK(DatasetHash(a) == ra.summary_hash);
    for (const auto &entry : m.at("samples"))
    {
      const DatasetSample s = ReadSample(a / entry.at("file").get<std::string>());
      CHECK(s.label == entry.at("label").get<int>());
      const nlohmann::json meta = s.Metadata();
      CHECK(meta.at("sample_id") == entry.at("id"));
      CHECK(meta.at("normalization").at("M").get<double>() > 0.0);
      CHECK(meta.at("layout") == "N_r,N_t,K_sel,N_p");
      CHECK(meta.at("seeds").at("master") == 5);
    }
    // The config echo reproduces the run configuration.
    std::ifstream in(a / "config.ini");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(ConfigHash(ParseRunConfig(text)) == ConfigHash(cfg));
  }
  SUBCASE("same seed gives byte-identical files, another seed does not")
  {
    const fs::path b = Scratch("gen_b");
    const GenerateReport rb = GenerateDataset(cfg, b);
    CHECK(rb.summary_hash == ra.summary_hash);
    CHECK(Slurp(a / "manifest") == Slurp(b / "manifest"));
    for (std::size_t i = 0; i < 4; ++i)
    {
      CHECK(Slurp(a / SampleRelativePath(i)) == Slurp(b / SampleRelativePath(i)));
    }
    RunConfig other = cfg;
    other.master_seed = 6;
    const GenerateReport rc = GenerateDataset(other, b);
    CHECK(rc.summary_hash != ra.summary_hash);
    fs::remove_all(b);
  }
  SUBCASE("verification catches tampering")
  {
    const fs::path b = Scratch("gen_tamper");
    fs::copy(a, b, fs::copy_options::recursive);
    fs::remove(b / SampleRelativePath(2));
    CHECK_THROWS_AS(VerifyDataset(b), Error);
    fs::remove_all(b);
    fs::copy(a, b, fs::copy_options::recursive);
    std::ofstream(b / "samples" / "000099.bin") << "junk";
    CHECK_THROWS_AS(VerifyDataset(b), Error);
    fs::remove_all(b);
  }
  SUBCASE("featurize")
  {
    const fs::path stf = Scratch("feat_stf");
    const FeatureReport fr = FeaturizeDataset(a, FeatureMode::StfInput, stf);
    CHECK(fr.samples == 4);
    CHECK(fr.dims == std::vector<std::uint32_t>{2, 2, 2, 2, 2});
    CHECK_NOTHROW(VerifyDataset(stf));
    const DatasetSample s = ReadSample(stf / SampleRelativePath(0));
    CHECK(s.dtype == SampleDtype::Float32);
    const RealTensor u = s.ToReal();
    double peak = 0.0;
    const std::size_t half = u.size() / 2;
    for (std::size_t i = 0; i < half; ++i)
    {
      peak = std::max(peak, std::hypot(u.data()[i], u.data()[half + i]));
    }
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-6));

    const fs::path fft = Scratch("feat_fft");
    const FeatureReport ff = FeaturizeDataset(a, FeatureMode::Fft4d, fft, 4);
    CHECK(ff.dims == std::vector<std::uint32_t>{8, 8});
    CHECK(fs::exists(fft / "csv" / "000003.csv"));
    CHECK(ReadManifest(fft).at("dims") == std::vector<int>{8, 8});
    CHECK_THROWS_AS(FeatureModeFromString("wavelet"), Error);
    try
    {
      FeaturizeDataset(a / "nope", FeatureMode::Fft4d, fft);
      FAIL("expected an error");
    }
    catch (const Error &e)
    {
      CHECK(std::string(e.what()).find("missing manifest") != std::string::npos);
    }
    fs::remove_all(stf);
    fs::remove_all(fft);
  }
  SUBCASE("regenerating into the same root drops stale samples")
  {
    RunConfig fewer = cfg;
    fewer.n_samples = 2;
    GenerateDataset(fewer, a);
    CHECK_FALSE(fs::exists(a / SampleRelativePath(3)));
    CHECK_NOTHROW(VerifyDataset(a));
  }
  fs::remove_all(a);
}

TEST_CASE("dataset generation options")
{
  SUBCASE("single-class mix")
  {
    RunConfig cfg = SmallConfig();
    cfg.class_mix = {1.0, 0.0};
    cfg.n_samples = 3;
    const fs::path root = Scratch("cars");
    const GenerateReport r = GenerateDataset(cfg, root);
    CHECK(r.class_counts[0] == 3);
    CHECK(r.class_counts[1] == 0);
    fs::remove_all(root);
  }
  SUBCASE("too few survivors for a stratified split fall back to train")
  {
    RunConfig cfg = SmallConfig();
    cfg.split = SplitRatios{};
    const fs::path root = Scratch("fallback");
    GenerateDataset(cfg, root);
    const nlohmann::json m = ReadManifest(root);
    CHECK(m.at("split_error").get<std::string>().find("fewer than the 3 requested splits") != std::string::npos);
    CHECK(m.at("splits").at("train") == 4);
    fs::remove_all(root);
  }
  SUBCASE("features sample format")
  {
    RunConfig cfg = SmallConfig();
    cfg.sample_format = SampleFormat::Features;
    cfg.n_samples = 2;
    const fs::path root = Scratch("features");
    GenerateDataset(cfg, root);
    const nlohmann::json m = ReadManifest(root);
    CHECK(m.at("dtype") == "float32");
    CHECK(m.at("dims") == std::vector<int>{2, 2, 2, 2, 2});
    CHECK(ReadSample(root / SampleRelativePath(1)).Metadata().at("layout") == "C,N_r,N_t,N_p,K_sel");
    fs::remove_all(root);
  }
  SUBCASE("failed dwells are skipped and recorded")
  {
    // Five-second frames push inbound trajectories through the array plane.
    RunConfig cfg = SmallConfig();
    cfg.n_samples = 8;
    cfg.dt = 5.0;
    cfg.split = SplitRatios{};
    const fs::path root = Scratch("failures");
    const GenerateReport r = GenerateDataset(cfg, root);
    CHECK(r.failures.size() > 0);
    CHECK(r.written > 0);
    CHECK(r.written + r.failures.size() == 8);
    const nlohmann::json m = ReadManifest(root);
    CHECK(m.at("failures").size() == r.failures.size());
    CHECK(m.at("sample_count") == r.written);
    for (const auto &f : r.failures)
    {
      CHECK_FALSE(fs::exists(root / SampleRelativePath(f.id)));
      CHECK(f.error.find("frame") != std::string::npos);
    }
    CHECK_NOTHROW(VerifyDataset(root));
    fs::remove_all(root);
  }
}
