// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "nfsim/nfsim.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <new>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "core/dataset_io.hpp"
#include "core/em_kernels.hpp"
#include "core/error.hpp"
#include "core/log.hpp"
#include "core/parallel.hpp"
#include "core/run_config.hpp"
#include "core/validation.hpp"

struct nfsim_config
{
  nfsim::RunConfig cfg;
  std::string text;
  std::string hash;

  void Refresh()
  {
    text = nfsim::DumpRunConfig(cfg);
    hash = nfsim::ConfigHash(cfg);
  }
};

struct nfsim_report
{
  std::string text;
  std::string json;
};

struct nfsim_sample
{
  nfsim::DatasetSample sample;
};

namespace
{

thread_local std::string t_last_error;

std::mutex g_log_mutex;
std::unique_ptr<std::ofstream> g_log_file;

static_assert(static_cast<int>(nfsim::ErrorCode::Internal) == NFSIM_E_INTERNAL);
static_assert(static_cast<int>(nfsim::ErrorCode::Config) == NFSIM_E_CONFIG);

nfsim_status Record(nfsim_status s, const std::string &what)
{
  t_last_error = what;
  return s;
}

// Runs body, mapping exceptions to status codes and the thread's last-error message.
template <typename F>
nfsim_status Guard(F &&body)
{
  try
  {
    t_last_error.clear();
    return body();
  }
  catch (const nfsim::Error &e)
  {
    return Record(static_cast<nfsim_status>(e.code()), e.what());
  }
  catch (const std::bad_alloc &)
  {
    return Record(NFSIM_E_INTERNAL, "out of memory");
  }
  catch (const std::exception &e)
  {
    return Record(NFSIM_E_INTERNAL, e.what());
  }
  catch (...)
  {
    return Record(NFSIM_E_INTERNAL, "unknown error");
  }
}

nfsim_status NullArgument(const char *name)
{
  return Record(NFSIM_E_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

}  // namespace

extern "C" {

const char *nfsim_version(void)
{
  return "0.1.0";
}

const char *nfsim_status_string(nfsim_status status)
{
  switch (status)
  {
    case NFSIM_OK:
      return "ok";
    case NFSIM_E_INVALID_ARGUMENT:
      return "invalid argument";
    case NFSIM_E_DOMAIN:
      return "domain error";
    case NFSIM_E_CONFIG:
      return "configuration error";
    case NFSIM_E_IO:
      return "I/O error";
    case NFSIM_E_FORMAT:
      return "format error";
    case NFSIM_E_NOT_CONVERGED:
      return "solver did not converge";
    case NFSIM_E_SINGULAR:
      return "singular system";
    case NFSIM_E_INTERNAL:
      return "internal error";
    case NFSIM_E_VALIDATION_FAILED:
      return "validation failed";
  }
  return "unknown status";
}

const char *nfsim_last_error(void)
{
  return t_last_error.c_str();
}

void nfsim_set_threads(size_t n)
{
  nfsim::SetThreadCount(n);
}

nfsim_status nfsim_set_log_file(const char *path)
{
  return Guard([&] {
    std::lock_guard lock(g_log_mutex);
    nfsim::SetLogSink(nullptr);
    g_log_file.reset();
    if (path)
    {
      auto f = std::make_unique<std::ofstream>(path, std::ios::app);
      if (!*f)
      {
        nfsim::Fail(nfsim::ErrorCode::Io, std::string("cannot open log file '") + path + "'");
      }
      g_log_file = std::move(f);
      nfsim::SetLogSink(g_log_file.get());
    }
    return NFSIM_OK;
  });
}

nfsim_status nfsim_config_create_default(nfsim_config **out)
{
  if (!out)
  {
    return NullArgument("out");
  }
  return Guard([&] {
    auto c = std::make_unique<nfsim_config>();
    c->cfg = nfsim::DefaultRunConfig();
    c->Refresh();
    *out = c.release();
    return NFSIM_OK;
  });
}

nfsim_status nfsim_config_load(const char *path, nfsim_config **out)
{
  if (!path || !out)
  {
    return NullArgument(!path ? "path" : "out");
  }
  return Guard([&] {
    auto c = std::make_unique<nfsim_config>();
    c->cfg = nfsim::LoadRunConfig(path);
    c->Refresh();
    *out = c.release();
    return NFSIM_OK;
  });
}

nfsim_status nfsim_config_parse(const char *ini_text, nfsim_config **out)
{
  if (!ini_text || !out)
  {
    return NullArgument(!ini_text ? "ini_text" : "out");
  }
  return Guard([&] {
    auto c = std::make_unique<nfsim_config>();
    c->cfg = nfsim::ParseRunConfig(ini_text);
    c->Refresh();
    *out = c.release();
    return NFSIM_OK;
  });
}

nfsim_status nfsim_config_set(nfsim_config *cfg, const char *assignment)
{
  if (!cfg || !assignment)
  {
    return NullArgument(!cfg ? "cfg" : "assignment");
  }
  return Guard([&] {
    nfsim::RunConfig next = cfg->cfg;
    nfsim::ApplyOverride(next, assignment);
    cfg->cfg = next;
    cfg->Refresh();
    return NFSIM_OK;
  });
}

nfsim_status nfsim_config_set_seed(nfsim_config *cfg, uint64_t seed)
{
  if (!cfg)
  {
    return NullArgument("cfg");
  }
  return Guard([&] {
    cfg->cfg.master_seed = seed;
    cfg->Refresh();
    return NFSIM_OK;
  });
}

const char *nfsim_config_text(const nfsim_config *cfg)
{
  return cfg ? cfg->text.c_str() : "";
}

const char *nfsim_config_hash(const nfsim_config *cfg)
{
  return cfg ? cfg->hash.c_str() : "";
}

void nfsim_config_destroy(nfsim_config *cfg)
{
  delete cfg;
}

const char *nfsim_report_text(const nfsim_report *report)
{
  return report ? report->text.c_str() : "";
}

const char *nfsim_report_json(const nfsim_report *report)
{
  return report ? report->json.c_str() : "";
}

void nfsim_report_destroy(nfsim_report *report)
{
  delete report;
}

nfsim_status nfsim_generate(const nfsim_config *cfg, const char *out_dir, nfsim_report **out)
{
  if (!cfg || !out_dir || !out)
  {
    return NullArgument(!cfg ? "cfg" : (!out_dir ? "out_dir" : "out"));
  }
  return Guard([&] {
    try
    {
      cfg->cfg.Validate();
    }
    catch (const nfsim::Error &e)
    {
      nfsim::Fail(nfsim::ErrorCode::Config, e.what());
    }
    const nfsim::GenerateReport r = nfsim::GenerateDataset(cfg->cfg, out_dir);
    const auto &m = r.manifest;
    std::ostringstream text;
    text << "samples_requested " << r.requested << '\n' << "samples_written " << r.written << '\n';
    text << "samples_failed " << r.failures.size() << '\n';
    text << "class_counts";
    for (const auto &[name, count] : m.at("class_counts").items())
    {
      text << ' ' << name << '=' << count.get<std::size_t>();
    }
    text << '\n';
    if (m.contains("splits"))
    {
      text << "splits train=" << m["splits"]["train"].get<std::size_t>() << " val=" << m["splits"]["val"].get<std::size_t>()
           << " test=" << m["splits"]["test"].get<std::size_t>() << '\n';
    }
    text << "noise_sigma_h " << r.sigma_h << '\n';
    text << "solver_total_iterations " << r.total_iterations << '\n';
    text << "solver_max_residual " << r.max_residual << '\n';
    text << "wall_seconds " << r.wall_seconds << '\n';
    text << "config_hash " << m.at("config_hash").get<std::string>() << '\n';
    text << "summary_hash " << r.summary_hash << '\n';
    for (const auto &f : r.failures)
    {
      text << "failed_sample " << f.id << ": " << f.error << '\n';
    }
    nlohmann::json j = {{"samples_requested", r.requested},
                        {"samples_written", r.written},
                        {"samples_failed", r.failures.size()},
                        {"class_counts", m.at("class_counts")},
                        {"noise_sigma_h", r.sigma_h},
                        {"solver_total_iterations", r.total_iterations},
                        {"solver_max_residual", r.max_residual},
                        {"wall_seconds", r.wall_seconds},
                        {"config_hash", m.at("config_hash")},
                        {"summary_hash", r.summary_hash}};
    *out = new nfsim_report{text.str(), j.dump()};
    return NFSIM_OK;
  });
}

nfsim_status nfsim_validate(const char *fault, uint64_t seed, nfsim_report **out)
{
  if (!out)
  {
    return NullArgument("out");
  }
  return Guard([&] {
    nfsim::ValidationOptions opts;
    opts.seed = seed;
    const std::string f = fault ? fault : "";
    if (f == "self_term_sign")
    {
      opts.flip_self_term = true;
    }
    else if (!f.empty())
    {
      nfsim::Fail(nfsim::ErrorCode::InvalidArgument, "unknown fault '" + f + "' (self_term_sign)");
    }
    const auto results = nfsim::RunValidation(opts);
    nlohmann::json checks = nlohmann::json::array();
    bool all = true;
    for (const auto &r : results)
    {
      all = all && r.pass;
      checks.push_back({{"name", r.name}, {"measured", r.measured}, {"bound", r.bound}, {"pass", r.pass},
                        {"seconds", r.seconds}});
    }
    *out = new nfsim_report{nfsim::FormatValidation(results), nlohmann::json{{"checks", checks}, {"pass", all}}.dump()};
    if (!all)
    {
      return Record(NFSIM_E_VALIDATION_FAILED, "one or more validation checks failed");
    }
    return NFSIM_OK;
  });
}

nfsim_status nfsim_features(const char *dataset_dir, const char *mode, const char *out_dir, size_t pad_factor,
                            nfsim_report **out)
{
  if (!dataset_dir || !mode || !out_dir || !out)
  {
    return NullArgument("dataset_dir, mode, out_dir and out");
  }
  return Guard([&] {
    const nfsim::FeatureMode m = nfsim::FeatureModeFromString(mode);
    const nfsim::FeatureReport r = nfsim::FeaturizeDataset(dataset_dir, m, out_dir, pad_factor);
    std::ostringstream text;
    text << "samples " << r.samples << '\n' << "dims";
    for (auto d : r.dims)
    {
      text << ' ' << d;
    }
    text << '\n';
    *out = new nfsim_report{text.str(), nlohmann::json{{"samples", r.samples}, {"dims", r.dims}, {"mode", mode}}.dump()};
    return NFSIM_OK;
  });
}

nfsim_status nfsim_bench(const size_t *sizes, size_t n_sizes, nfsim_report **out)
{
  if (!sizes || !out)
  {
    return NullArgument(!sizes ? "sizes" : "out");
  }
  return Guard([&] {
    const auto rows = nfsim::RunBench(std::vector<std::size_t>(sizes, sizes + n_sizes));
    nlohmann::json j = nlohmann::json::array();
    for (const auto &r : rows)
    {
      j.push_back({{"n_s", r.n_s},
                   {"dense_seconds", r.dense_seconds},
                   {"fft_seconds", r.fft_seconds},
                   {"fft_iterations", r.fft_iterations},
                   {"h_relative_difference", r.h_relative_difference}});
    }
    *out = new nfsim_report{nfsim::BenchCsv(rows), j.dump()};
    return NFSIM_OK;
  });
}

nfsim_status nfsim_verify_dataset(const char *dataset_dir)
{
  if (!dataset_dir)
  {
    return NullArgument("dataset_dir");
  }
  return Guard([&] {
    nfsim::VerifyDataset(dataset_dir);
    return NFSIM_OK;
  });
}

nfsim_status nfsim_sample_read(const char *path, nfsim_sample **out)
{
  if (!path || !out)
  {
    return NullArgument(!path ? "path" : "out");
  }
  return Guard([&] {
    *out = new nfsim_sample{nfsim::ReadSample(path)};
    return NFSIM_OK;
  });
}

nfsim_status nfsim_sample_write(const char *path, nfsim_dtype dtype, size_t rank, const uint32_t *dims,
                                const float *data, int32_t label, const char *metadata_json)
{
  if (!path || !dims || !data)
  {
    return NullArgument(!path ? "path" : (!dims ? "dims" : "data"));
  }
  return Guard([&] {
    if (rank < 1 || rank > nfsim::kMaxSampleRank)
    {
      nfsim::Fail(nfsim::ErrorCode::InvalidArgument, "sample rank must be 1..5");
    }
    if (dtype != NFSIM_DTYPE_COMPLEX64 && dtype != NFSIM_DTYPE_FLOAT32)
    {
      nfsim::Fail(nfsim::ErrorCode::InvalidArgument, "unknown sample dtype");
    }
    if (std::find(dims, dims + rank, 0u) != dims + rank)
    {
      nfsim::Fail(nfsim::ErrorCode::InvalidArgument, "sample dims must be positive");
    }
    if (metadata_json && !nlohmann::json::accept(metadata_json))
    {
      nfsim::Fail(nfsim::ErrorCode::InvalidArgument, "sample metadata is not valid JSON");
    }
    nfsim::DatasetSample s;
    s.dtype = static_cast<nfsim::SampleDtype>(dtype);
    s.dims.assign(dims, dims + rank);
    const std::size_t floats = s.ElementCount() * (dtype == NFSIM_DTYPE_COMPLEX64 ? 2 : 1);
    s.payload.assign(data, data + floats);
    s.label = label;
    s.metadata = metadata_json ? metadata_json : "{}";
    nfsim::WriteSample(path, s);
    return NFSIM_OK;
  });
}

size_t nfsim_sample_rank(const nfsim_sample *s)
{
  return s ? s->sample.dims.size() : 0;
}

void nfsim_sample_dims(const nfsim_sample *s, uint32_t *dims)
{
  if (s && dims)
  {
    std::memcpy(dims, s->sample.dims.data(), s->sample.dims.size() * sizeof(uint32_t));
  }
}

nfsim_dtype nfsim_sample_dtype(const nfsim_sample *s)
{
  return s ? static_cast<nfsim_dtype>(s->sample.dtype) : NFSIM_DTYPE_FLOAT32;
}

const float *nfsim_sample_data(const nfsim_sample *s, size_t *n_floats)
{
  if (n_floats)
  {
    *n_floats = s ? s->sample.payload.size() : 0;
  }
  return s ? s->sample.payload.data() : nullptr;
}

int32_t nfsim_sample_label(const nfsim_sample *s)
{
  return s ? s->sample.label : -1;
}

const char *nfsim_sample_metadata(const nfsim_sample *s)
{
  return s ? s->sample.metadata.c_str() : "";
}

void nfsim_sample_destroy(nfsim_sample *s)
{
  delete s;
}

nfsim_status nfsim_dyadic_green(const double r[3], const double r_src[3], double frequency_hz, double out[18])
{
  if (!r || !r_src || !out)
  {
    return NullArgument("r, r_src and out");
  }
  return Guard([&] {
    if (!(frequency_hz > 0.0))
    {
      nfsim::Fail(nfsim::ErrorCode::InvalidArgument, "frequency must be positive");
    }
    const nfsim::Dyad g = nfsim::DyadicGreen(nfsim::Vec3(r[0], r[1], r[2]), nfsim::Vec3(r_src[0], r_src[1], r_src[2]),
                                             nfsim::Wavenumber::FromFrequency(frequency_hz));
    for (int i = 0; i < 3; ++i)
    {
      for (int j = 0; j < 3; ++j)
      {
        out[2 * (3 * i + j)] = g(i, j).real();
        out[2 * (3 * i + j) + 1] = g(i, j).imag();
      }
    }
    return NFSIM_OK;
  });
}

}  // extern "C"
