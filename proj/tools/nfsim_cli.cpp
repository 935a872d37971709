// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

// nfsim command-line front end. Talks to the simulator only through the C API.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nfsim/nfsim.h"

namespace
{

enum Exit : int
{
  kOk = 0,
  kValidationFailed = 1,
  kUsage = 2,
  kRuntime = 3,
};

struct ConfigDeleter
{
  void operator()(nfsim_config *c) const { nfsim_config_destroy(c); }
};
struct ReportDeleter
{
  void operator()(nfsim_report *r) const { nfsim_report_destroy(r); }
};
using ConfigPtr = std::unique_ptr<nfsim_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<nfsim_report, ReportDeleter>;

int ExitFor(nfsim_status s)
{
  switch (s)
  {
    case NFSIM_OK:
      return kOk;
    case NFSIM_E_VALIDATION_FAILED:
      return kValidationFailed;
    case NFSIM_E_CONFIG:
    case NFSIM_E_INVALID_ARGUMENT:
      return kUsage;
    default:
      return kRuntime;
  }
}

int Report(nfsim_status s, const std::string &context)
{
  std::cerr << "nfsim " << context << ": " << nfsim_status_string(s) << ": " << nfsim_last_error() << '\n';
  return ExitFor(s);
}

int WriteText(const std::string &path, const std::string &text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
  {
    std::cerr << "nfsim: cannot write '" << path << "'\n";
    return kRuntime;
  }
  return kOk;
}

void Echo(const std::string &text)
{
  // Effective configuration, as comment lines so stdout stays parseable.
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line))
  {
    std::cout << "# " << line << '\n';
  }
}

struct GenerateArgs
{
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int Generate(const GenerateArgs &a)
{
  nfsim_config *raw = nullptr;
  const nfsim_status s = a.config.empty() ? nfsim_config_create_default(&raw) : nfsim_config_load(a.config.c_str(), &raw);
  if (s != NFSIM_OK)
  {
    return Report(s, "generate");
  }
  ConfigPtr cfg(raw);
  for (const auto &o : a.overrides)
  {
    if (const nfsim_status e = nfsim_config_set(cfg.get(), o.c_str()); e != NFSIM_OK)
    {
      return Report(e, "generate --set " + o);
    }
  }
  if (a.seed_set)
  {
    nfsim_config_set_seed(cfg.get(), a.seed);
  }
  Echo(nfsim_config_text(cfg.get()));
  std::cout << std::flush;

  nfsim_report *rep = nullptr;
  const nfsim_status g = nfsim_generate(cfg.get(), a.out.c_str(), &rep);
  if (g != NFSIM_OK)
  {
    return Report(g, "generate");
  }
  ReportPtr report(rep);
  std::cout << nfsim_report_text(report.get());
  const auto j = nlohmann::json::parse(nfsim_report_json(report.get()));
  if (j.at("samples_written").get<std::size_t>() == 0)
  {
    std::cerr << "nfsim generate: no sample could be simulated\n";
    return kRuntime;
  }
  return kOk;
}

int Validate(const std::string &fault, std::uint64_t seed)
{
  std::cout << "# fault " << (fault.empty() ? "none" : fault) << "\n# seed " << seed << '\n';
  std::cout << "# name measured bound status\n";
  nfsim_report *rep = nullptr;
  const nfsim_status s = nfsim_validate(fault.c_str(), seed, &rep);
  if (!rep)
  {
    return Report(s, "validate");
  }
  ReportPtr report(rep);
  std::cout << nfsim_report_text(report.get());
  return ExitFor(s);
}

int Features(const std::string &dataset, const std::string &mode, const std::string &out, std::size_t pad)
{
  std::cout << "# dataset " << dataset << "\n# mode " << mode << "\n# pad_factor " << pad << "\n# out " << out << '\n';
  nfsim_report *rep = nullptr;
  const nfsim_status s = nfsim_features(dataset.c_str(), mode.c_str(), out.c_str(), pad, &rep);
  if (s != NFSIM_OK)
  {
    return Report(s, "features");
  }
  ReportPtr report(rep);
  std::cout << nfsim_report_text(report.get());
  return kOk;
}

int Bench(const std::vector<std::size_t> &sizes, const std::string &csv_path)
{
  std::cout << "# sizes";
  for (auto n : sizes)
  {
    std::cout << ' ' << n;
  }
  std::cout << '\n';
  nfsim_report *rep = nullptr;
  const nfsim_status s = nfsim_bench(sizes.data(), sizes.size(), &rep);
  if (s != NFSIM_OK)
  {
    return Report(s, "bench");
  }
  ReportPtr report(rep);
  std::cout << nfsim_report_text(report.get());
  return csv_path.empty() ? kOk : WriteText(csv_path, nfsim_report_text(report.get()));
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"nfsim: near-field ISAC channel simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nfsim_version()));
  std::size_t threads = 0;
  std::string log_path;
  app.add_option("--threads", threads, "worker threads (default: NFSIM_THREADS or all cores)");
  app.add_option("--log", log_path, "append JSON-lines diagnostics to this file");

  GenerateArgs gen;
  auto *generate = app.add_subcommand("generate", "simulate a dataset");
  generate->add_option("--config", gen.config, "INI config file (default: built-in desk preset)")->check(CLI::ExistingFile);
  generate->add_option("--set", gen.overrides, "override, section.key=value (repeatable)");
  generate->add_option("--out", gen.out, "dataset directory")->required();
  generate->add_option("--seed", gen.seed, "master seed (overrides run.master_seed)")
      ->each([&](const std::string &) { gen.seed_set = true; });

  std::string fault;
  std::uint64_t validate_seed = 20260101;
  auto *validate = app.add_subcommand("validate", "run the physics self-checks");
  validate->add_option("--inject-fault", fault, "test hook: self_term_sign")->check(CLI::IsMember({"self_term_sign"}));
  validate->add_option("--seed", validate_seed, "seed for randomized checks");

  std::string dataset;
  std::string mode = "stf_input";
  std::string feat_out;
  std::size_t pad = 1;
  auto *features = app.add_subcommand("features", "featurize a generated dataset");
  features->add_option("--dataset", dataset, "dataset directory")->required();
  features->add_option("--mode", mode, "stf_input | fft4d")->check(CLI::IsMember({"stf_input", "fft4d"}));
  features->add_option("--out", feat_out, "output directory")->required();
  features->add_option("--pad", pad, "fft4d zero-padding factor")->check(CLI::IsMember({1, 4}));

  std::vector<std::size_t> sizes{8, 64, 216};
  std::string bench_csv;
  auto *bench = app.add_subcommand("bench", "time dense vs FFT-accelerated solves");
  bench->add_option("--sizes", sizes, "voxel counts N_s")->delimiter(',')->check(CLI::PositiveNumber);
  bench->add_option("--csv", bench_csv, "also write the table to this file");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  nfsim_set_threads(threads);
  if (!log_path.empty())
  {
    if (const nfsim_status s = nfsim_set_log_file(log_path.c_str()); s != NFSIM_OK)
    {
      return Report(s, "--log");
    }
  }

  int code = kOk;
  if (*generate)
  {
    code = Generate(gen);
  }
  else if (*validate)
  {
    code = Validate(fault, validate_seed);
  }
  else if (*features)
  {
    code = Features(dataset, mode, feat_out, pad);
  }
  else if (*bench)
  {
    code = Bench(sizes, bench_csv);
  }
  nfsim_set_log_file(nullptr);
  return code;
}
