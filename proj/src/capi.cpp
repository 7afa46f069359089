// Copyright 2026 The robustm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "robustm/robustm.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "robustm/app.hpp"
#include "robustm/error.hpp"
#include "robustm/io.hpp"

using nlohmann::json;

struct rm_config {
  json user = json::object();
};

struct rm_dataset {
  robustm::Dataset data;
};

struct rm_fit_result {
  robustm::ModelSpec model;
  robustm::FitResult result;
};

namespace {

thread_local std::string last_error;

rm_status fail(rm_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename F>
rm_status guarded(F&& f) {
  last_error.clear();
  try {
    return f();
  } catch (const robustm::Error& err) {
    return fail(static_cast<rm_status>(err.code()), err.what());
  } catch (const json::parse_error& err) {
    return fail(RM_ERR_CONFIG, std::string("invalid JSON: ") + err.what());
  } catch (const json::exception& err) {
    return fail(RM_ERR_CONFIG, err.what());
  } catch (const std::filesystem::filesystem_error& err) {
    return fail(RM_ERR_IO, err.what());
  } catch (const std::bad_alloc&) {
    return fail(RM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& err) {
    return fail(RM_ERR_INTERNAL, err.what());
  } catch (...) {
    return fail(RM_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_json(char** out, const json& value) {
  if (out) *out = copy_string(value.dump(2));
}

rm_status require(const void* p, const char* name) {
  if (!p) return fail(RM_ERR_CONFIG, std::string(name) + " must not be NULL");
  return RM_OK;
}

}  // namespace

extern "C" {

const char* rm_version(void) {
  static const std::string version = robustm::version_string();
  return version.c_str();
}

const char* rm_last_error(void) { return last_error.c_str(); }

void rm_string_free(char* s) { std::free(s); }

rm_status rm_config_create(const char* json_text, rm_config** out) {
  if (rm_status s = require(out, "out")) return s;
  return guarded([&] {
    auto config = std::make_unique<rm_config>();
    if (json_text) config->user = json::parse(json_text);
    robustm::resolve_config(config->user);
    *out = config.release();
    return RM_OK;
  });
}

rm_status rm_config_load(const char* path, rm_config** out) {
  if (rm_status s = require(path, "path")) return s;
  if (rm_status s = require(out, "out")) return s;
  return guarded([&] {
    const std::string text = robustm::read_text(path);
    auto config = std::make_unique<rm_config>();
    try {
      config->user = json::parse(text);
    } catch (const json::parse_error& err) {
      throw robustm::ConfigError(std::string(path) + ": invalid JSON: " + err.what());
    }
    robustm::resolve_config(config->user);
    *out = config.release();
    return RM_OK;
  });
}

rm_status rm_config_set(rm_config* config, const char* pointer, const char* json_value) {
  if (rm_status s = require(config, "config")) return s;
  if (rm_status s = require(pointer, "pointer")) return s;
  if (rm_status s = require(json_value, "json_value")) return s;
  return guarded([&] {
    json next = config->user;
    robustm::set_config_value(next, pointer, json::parse(json_value));
    robustm::resolve_config(next);
    config->user = std::move(next);
    return RM_OK;
  });
}

rm_status rm_config_resolve(const rm_config* config, char** out_json) {
  if (rm_status s = require(config, "config")) return s;
  if (rm_status s = require(out_json, "out_json")) return s;
  return guarded([&] {
    put_json(out_json, robustm::resolve_config(config->user));
    return RM_OK;
  });
}

void rm_config_free(rm_config* config) { delete config; }

rm_status rm_run_simulate(const rm_config* config, const char* out_csv, char** summary_json) {
  if (rm_status s = require(config, "config")) return s;
  if (rm_status s = require(out_csv, "out_csv")) return s;
  return guarded([&] {
    const auto r = robustm::cmd_simulate(robustm::resolve_config(config->user), out_csv);
    put_json(summary_json, r.summary);
    return static_cast<rm_status>(r.status);
  });
}

rm_status rm_run_fit(const rm_config* config, const char* data_csv, const char* out_json,
                     char** summary_json) {
  if (rm_status s = require(config, "config")) return s;
  if (rm_status s = require(data_csv, "data_csv")) return s;
  if (rm_status s = require(out_json, "out_json")) return s;
  return guarded([&] {
    const auto r = robustm::cmd_fit(robustm::resolve_config(config->user), data_csv, out_json);
    put_json(summary_json, r.summary);
    if (r.status == 1) last_error = "fit did not converge";
    return static_cast<rm_status>(r.status);
  });
}

rm_status rm_run_mc(const rm_config* config, const char* out_csv, const char* markdown_or_null,
                    rm_progress_fn progress, void* user, char** summary_json) {
  if (rm_status s = require(config, "config")) return s;
  if (rm_status s = require(out_csv, "out_csv")) return s;
  return guarded([&] {
    std::optional<std::filesystem::path> md;
    if (markdown_or_null) md = markdown_or_null;
    robustm::McProgress cb;
    if (progress) cb = [&](int done, int total) { progress(done, total, user); };
    const auto r = robustm::cmd_mc(robustm::resolve_config(config->user), out_csv, md, cb);
    put_json(summary_json, r.summary);
    return static_cast<rm_status>(r.status);
  });
}

rm_status rm_run_forecast(const rm_config* config, const char* data_csv, const char* out_csv,
                          const char* dump_or_null, char** summary_json) {
  if (rm_status s = require(config, "config")) return s;
  if (rm_status s = require(data_csv, "data_csv")) return s;
  if (rm_status s = require(out_csv, "out_csv")) return s;
  return guarded([&] {
    std::optional<std::filesystem::path> dump;
    if (dump_or_null) dump = dump_or_null;
    const auto r =
        robustm::cmd_forecast(robustm::resolve_config(config->user), data_csv, out_csv, dump);
    put_json(summary_json, r.summary);
    return static_cast<rm_status>(r.status);
  });
}

rm_status rm_loss_probe(const char* loss, const double* orders, size_t n_orders, double u_min,
                        double u_max, double step, int with_gap, char** out_csv) {
  if (rm_status s = require(loss, "loss")) return s;
  if (n_orders > 0) {
    if (rm_status s = require(orders, "orders")) return s;
  }
  if (rm_status s = require(out_csv, "out_csv")) return s;
  return guarded([&] {
    const std::vector<double> m(orders, orders + n_orders);
    *out_csv = copy_string(robustm::loss_probe(robustm::LossSpec::parse(loss), m,
                                               {u_min, u_max, step}, with_gap != 0));
    return RM_OK;
  });
}

rm_status rm_loss_eval(const char* loss, double m, double u, int order, double* out) {
  if (rm_status s = require(loss, "loss")) return s;
  if (rm_status s = require(out, "out")) return s;
  return guarded([&] {
    const auto spec = robustm::LossSpec::parse(loss);
    if (m <= 0.0) {
      if (order == 0) {
        *out = robustm::eval_loss(spec, u);
      } else if (order == 1) {
        *out = robustm::subgrad(spec, u);
      } else {
        throw robustm::ConfigError("rm_loss_eval: the unsmoothed loss has derivatives of order 0 and 1 only");
      }
      return RM_OK;
    }
    if (order < 0 || order > 2) throw robustm::ConfigError("rm_loss_eval: order must be 0, 1 or 2");
    *out = robustm::mollified(spec, robustm::MollifierOrder(m), u, order);
    return RM_OK;
  });
}

rm_status rm_dataset_read(const char* path, int d1, int d2, rm_dataset** out) {
  if (rm_status s = require(path, "path")) return s;
  if (rm_status s = require(out, "out")) return s;
  return guarded([&] {
    auto d = std::make_unique<rm_dataset>();
    d->data = robustm::read_dataset(path, d1, d2);
    *out = d.release();
    return RM_OK;
  });
}

rm_status rm_dataset_simulate(const rm_config* config, rm_dataset** out) {
  if (rm_status s = require(config, "config")) return s;
  if (rm_status s = require(out, "out")) return s;
  return guarded([&] {
    const json resolved = robustm::resolve_config(config->user);
    const auto model = robustm::model_from_config(resolved);
    const auto truth = robustm::truth_from_config(resolved);
    if (!truth) throw robustm::ConfigError("model.truth is required unless model.example is set");
    auto d = std::make_unique<rm_dataset>();
    d->data = robustm::simulate(robustm::dgp_from_config(resolved), model, *truth,
                                resolved["seed"].get<std::uint64_t>())
                  .data;
    *out = d.release();
    return RM_OK;
  });
}

rm_status rm_dataset_write(const rm_dataset* data, const char* path) {
  if (rm_status s = require(data, "data")) return s;
  if (rm_status s = require(path, "path")) return s;
  return guarded([&] {
    robustm::write_dataset(path, data->data);
    return RM_OK;
  });
}

int rm_dataset_rows(const rm_dataset* data) { return data ? data->data.n() : 0; }

void rm_dataset_free(rm_dataset* data) { delete data; }

rm_status rm_fit(const rm_config* config, const rm_dataset* data, rm_fit_result** out) {
  if (rm_status s = require(config, "config")) return s;
  if (rm_status s = require(data, "data")) return s;
  if (rm_status s = require(out, "out")) return s;
  return guarded([&] {
    const json resolved = robustm::resolve_config(config->user);
    auto r = std::make_unique<rm_fit_result>();
    r->model = robustm::model_from_config(resolved);
    r->result = robustm::fit(r->model, data->data, robustm::fit_from_config(resolved));
    const bool converged = r->result.converged;
    *out = r.release();
    if (!converged) {
      last_error = "fit did not converge";
      return RM_NOT_CONVERGED;
    }
    return RM_OK;
  });
}

int rm_fit_converged(const rm_fit_result* result) {
  return result && result->result.converged ? 1 : 0;
}

size_t rm_fit_param_count(const rm_fit_result* result) {
  return result ? static_cast<size_t>(result->model.param_count()) : 0;
}

rm_status rm_fit_params(const rm_fit_result* result, double* out, size_t capacity) {
  if (rm_status s = require(result, "result")) return s;
  if (rm_status s = require(out, "out")) return s;
  return guarded([&] {
    const Eigen::VectorXd flat = result->result.params.flatten();
    if (capacity < static_cast<size_t>(flat.size())) {
      throw robustm::ShapeError("rm_fit_params: capacity " + std::to_string(capacity) +
                                " is below the parameter count " + std::to_string(flat.size()));
    }
    for (Eigen::Index i = 0; i < flat.size(); ++i) out[i] = flat[i];
    return RM_OK;
  });
}

rm_status rm_fit_to_json(const rm_fit_result* result, char** out_json) {
  if (rm_status s = require(result, "result")) return s;
  if (rm_status s = require(out_json, "out_json")) return s;
  return guarded([&] {
    put_json(out_json, robustm::fit_result_to_json(result->model, result->result));
    return RM_OK;
  });
}

void rm_fit_free(rm_fit_result* result) { delete result; }

}  // extern "C"
