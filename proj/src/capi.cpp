// Copyright 2026 The gesturespot Authors
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

#include "gesturespot/gesturespot.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <optional>
#include <string>

#include "gesturespot/config.hpp"
#include "gesturespot/eval.hpp"
#include "gesturespot/io.hpp"
#include "gesturespot/model_io.hpp"
#include "gesturespot/pipeline.hpp"
#include "gesturespot/synthgen.hpp"

using namespace gesturespot;

struct gs_config {
  RunConfig config;
};

struct gs_dataset {
  Dataset data;
  std::optional<std::string> manifest;
};

struct gs_model {
  ModelBundle bundle;
  std::string log;
};

struct gs_predictions {
  IntervalMap predictions;
};

struct gs_report {
  EvalReport report;
  std::string table;
};

namespace {

thread_local std::string g_last_error;

gs_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidArgument: return GS_ERR_INVALID_ARGUMENT;
    case ErrorKind::kParse: return GS_ERR_PARSE;
    case ErrorKind::kIo: return GS_ERR_IO;
    case ErrorKind::kValidation: return GS_ERR_VALIDATION;
    case ErrorKind::kNumeric: return GS_ERR_NUMERIC;
  }
  return GS_ERR_INTERNAL;
}

template <class Fn>
gs_status guarded(Fn&& fn) {
  try {
    fn();
    return GS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GS_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorKind::kInvalidArgument, std::string(what) + " must not be NULL");
}

double or_nan(const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

extern "C" {

const char* gs_version(void) { return "0.1.0"; }

const char* gs_last_error(void) { return g_last_error.c_str(); }

const char* gs_status_name(gs_status status) {
  switch (status) {
    case GS_OK: return "ok";
    case GS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GS_ERR_PARSE: return "parse error";
    case GS_ERR_IO: return "i/o error";
    case GS_ERR_VALIDATION: return "validation error";
    case GS_ERR_NUMERIC: return "numeric error";
    case GS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

gs_status gs_config_create(gs_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new gs_config();
  });
}

void gs_config_free(gs_config* config) { delete config; }

gs_status gs_config_set(gs_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->config.set(key, value);
  });
}

gs_status gs_config_get(const gs_config* config, const char* key, char* buf, size_t size, size_t* needed) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    const std::string v = config->config.get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && size > 0) {
      const size_t n = std::min(size - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
  });
}

gs_status gs_config_load_file(gs_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    RunConfig c = config->config;
    c.merge_text(read_text_file(path));
    config->config = c;
  });
}

gs_status gs_config_write_file(const gs_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    write_text_file(path, config->config.to_text());
  });
}

gs_status gs_dataset_generate(const gs_config* config, gs_dataset** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    config->config.gen.validate();
    auto g = generate_dataset(config->config.gen);
    auto* d = new gs_dataset();
    d->manifest = write_manifest(g);
    d->data = std::move(g.data);
    *out = d;
  });
}

gs_status gs_dataset_load(const char* dir, gs_dataset** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    auto* d = new gs_dataset();
    try {
      d->data = load_dataset(dir);
    } catch (...) {
      delete d;
      throw;
    }
    *out = d;
  });
}

gs_status gs_dataset_save(const gs_dataset* dataset, const char* dir) {
  return guarded([&] {
    require(dataset, "dataset");
    require(dir, "dir");
    save_dataset(dir, dataset->data);
    if (dataset->manifest) write_text_file(std::filesystem::path(dir) / "manifest.txt", *dataset->manifest);
  });
}

size_t gs_dataset_size(const gs_dataset* dataset) { return dataset ? dataset->data.sequences.size() : 0; }

void gs_dataset_free(gs_dataset* dataset) { delete dataset; }

gs_status gs_model_train(const gs_dataset* dataset, const gs_config* config, gs_model** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    require(out, "out");
    std::vector<std::string> log;
    auto* m = new gs_model();
    try {
      m->bundle = train_model(dataset->data, config->config, &log);
    } catch (...) {
      delete m;
      throw;
    }
    for (const auto& l : log) m->log += l + '\n';
    *out = m;
  });
}

gs_status gs_model_load(const char* path, gs_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto bundle = parse_model(read_text_file(path));
    auto* m = new gs_model();
    m->bundle = std::move(bundle);
    *out = m;
  });
}

gs_status gs_model_save(const gs_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    write_text_file(path, write_model(model->bundle));
  });
}

gs_status gs_model_write_curve(const gs_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    write_text_file(path, training_curve_csv(model->bundle));
  });
}

const char* gs_model_log(const gs_model* model) { return model ? model->log.c_str() : ""; }

size_t gs_model_parameter_count(const gs_model* model) {
  if (!model) return 0;
  size_t n = 0;
  for (const auto& [_, e] : model->bundle.ensembles)
    for (const auto& m : e.members) n += m.parameter_count();
  return n;
}

gs_status gs_model_config(const gs_model* model, gs_config** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    auto* c = new gs_config();
    try {
      c->config = RunConfig::parse(model->bundle.config);
    } catch (...) {
      delete c;
      throw;
    }
    *out = c;
  });
}

void gs_model_free(gs_model* model) { delete model; }

size_t gs_tcn_parameter_count(int input_dim, int window, int classes) {
  TcnShape s;
  s.input_dim = input_dim;
  s.window = window;
  s.classes = classes;
  try {
    s.validate();
  } catch (const Error& e) {
    g_last_error = e.what();
    return 0;
  }
  return s.parameter_count();
}

gs_status gs_detect(const gs_model* model, const gs_dataset* dataset, const gs_config* config, gs_predictions** out,
                    gs_timing* timing) {
  return guarded([&] {
    require(model, "model");
    require(dataset, "dataset");
    require(config, "config");
    require(out, "out");
    auto r = detect_sequence_set(dataset->data, model->bundle, config->config);
    if (timing) {
      timing->steps = r.timing.step_ms.size();
      timing->mean_ms = r.timing.mean();
      timing->p50_ms = r.timing.percentile(0.5);
      timing->p95_ms = r.timing.percentile(0.95);
      timing->max_ms = r.timing.max();
    }
    auto* p = new gs_predictions();
    p->predictions = std::move(r.predictions);
    *out = p;
  });
}

gs_status gs_predictions_load(const char* path, gs_predictions** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto preds = parse_prediction_file(read_text_file(path));
    auto* p = new gs_predictions();
    p->predictions = std::move(preds);
    *out = p;
  });
}

gs_status gs_predictions_save(const gs_predictions* predictions, const char* path) {
  return guarded([&] {
    require(predictions, "predictions");
    require(path, "path");
    write_text_file(path, write_prediction_file(predictions->predictions));
  });
}

gs_status gs_predictions_from_dataset(const gs_dataset* dataset, gs_predictions** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    auto* p = new gs_predictions();
    for (const auto& [id, intervals] : dataset->data.annotations) {
      auto& v = p->predictions[id];
      for (auto g : intervals) {
        g.last_frame_used = g.end;
        v.push_back(g);
      }
    }
    *out = p;
  });
}

size_t gs_predictions_count(const gs_predictions* predictions) {
  if (!predictions) return 0;
  size_t n = 0;
  for (const auto& [_, v] : predictions->predictions) n += v.size();
  return n;
}

void gs_predictions_free(gs_predictions* predictions) { delete predictions; }

gs_status gs_evaluate(const gs_dataset* truth, const gs_predictions* predictions, double min_overlap,
                      gs_report** out) {
  return guarded([&] {
    require(truth, "truth");
    require(predictions, "predictions");
    require(out, "out");
    auto* r = new gs_report();
    try {
      r->report = evaluate(truth->data.annotations, predictions->predictions, min_overlap);
    } catch (...) {
      delete r;
      throw;
    }
    r->table = r->report.to_table();
    *out = r;
  });
}

gs_status gs_report_write_csv(const gs_report* report, const char* path) {
  return guarded([&] {
    require(report, "report");
    require(path, "path");
    write_text_file(path, report->report.to_csv());
  });
}

const char* gs_report_to_string(const gs_report* report) { return report ? report->table.c_str() : ""; }

gs_status gs_report_aggregate(const gs_report* report, gs_aggregate* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    const auto& a = report->report.aggregate;
    out->classes = a.classes;
    out->detection_rate = or_nan(a.detection_rate);
    out->fp_score = or_nan(a.fp_score);
    out->jaccard = or_nan(a.jaccard);
    out->delay_from_start = or_nan(a.delay_from_start);
    out->delay_from_end = or_nan(a.delay_from_end);
  });
}

void gs_report_free(gs_report* report) { delete report; }

gs_status gs_sweep_write_csv(const gs_dataset* truth, const gs_predictions* predictions, const double* thresholds,
                             size_t count, const char* path) {
  return guarded([&] {
    require(truth, "truth");
    require(predictions, "predictions");
    require(path, "path");
    if (count > 0) require(thresholds, "thresholds");
    const auto points = overlap_sweep(truth->data.annotations, predictions->predictions,
                                      std::span<const double>(thresholds, count));
    write_text_file(path, sweep_to_csv(points));
  });
}

gs_status gs_features_dump(const gs_dataset* dataset, const char* sequence_id, const char* feature_set,
                           const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(sequence_id, "sequence_id");
    require(feature_set, "feature_set");
    require(path, "path");
    const auto set = parse_feature_set(feature_set);
    for (const auto& seq : dataset->data.sequences)
      if (seq.id == sequence_id) {
        write_text_file(path, feature_dump_csv(seq, set));
        return;
      }
    throw Error(ErrorKind::kInvalidArgument, "no sequence '" + std::string(sequence_id) + "' in the dataset");
  });
}

}  // extern "C"
