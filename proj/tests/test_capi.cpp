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

// Exercises the shared library through its C header only.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "gesturespot/gesturespot.h"

namespace fs = std::filesystem;

namespace {

int failures = 0;

#define EXPECT(cond)                                                            \
  do {                                                                          \
    if (!(cond)) {                                                              \
      std::fprintf(stderr, "%s:%d: expectation failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                               \
    }                                                                           \
  } while (0)

#define EXPECT_OK(call)                                                                                 \
  do {                                                                                                  \
    const gs_status s_ = (call);                                                                        \
    if (s_ != GS_OK) {                                                                                  \
      std::fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call, gs_status_name(s_),      \
                   gs_last_error());                                                                    \
      ++failures;                                                                                       \
    }                                                                                                   \
  } while (0)

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void test_errors() {
  EXPECT(std::strcmp(gs_status_name(GS_OK), "OK") == 0 || std::strlen(gs_status_name(GS_OK)) > 0);
  EXPECT(std::strlen(gs_version()) > 0);
  gs_config* c = nullptr;
  EXPECT(gs_config_create(nullptr) == GS_ERR_INVALID_ARGUMENT);
  EXPECT(std::strlen(gs_last_error()) > 0);
  EXPECT_OK(gs_config_create(&c));
  EXPECT(gs_config_set(c, "no.such.key", "1") == GS_ERR_INVALID_ARGUMENT);
  EXPECT(std::strstr(gs_last_error(), "no.such.key") != nullptr);
  EXPECT(gs_config_set(c, nullptr, "1") == GS_ERR_INVALID_ARGUMENT);
  EXPECT(gs_config_set(nullptr, "train.epochs", "1") == GS_ERR_INVALID_ARGUMENT);

  gs_dataset* d = nullptr;
  EXPECT(gs_dataset_load("/nonexistent/gesturespot", &d) == GS_ERR_IO);
  EXPECT(d == nullptr);
  gs_model* m = nullptr;
  EXPECT(gs_model_load("/nonexistent/model.txt", &m) == GS_ERR_IO);
  EXPECT(gs_dataset_size(nullptr) == 0);
  EXPECT(gs_predictions_count(nullptr) == 0);
  gs_config_free(nullptr);
  gs_dataset_free(nullptr);
  gs_model_free(nullptr);
  gs_predictions_free(nullptr);
  gs_report_free(nullptr);
  gs_config_free(c);
}

void test_config_buffers(const fs::path& dir) {
  gs_config* c = nullptr;
  EXPECT_OK(gs_config_create(&c));
  EXPECT_OK(gs_config_set(c, "train.epochs", "42"));
  size_t needed = 0;
  char small[2];
  EXPECT_OK(gs_config_get(c, "train.epochs", small, sizeof small, &needed));
  EXPECT(needed == 3);
  EXPECT(std::strcmp(small, "4") == 0);
  char buf[32];
  EXPECT_OK(gs_config_get(c, "train.epochs", buf, sizeof buf, &needed));
  EXPECT(std::strcmp(buf, "42") == 0);
  EXPECT_OK(gs_config_get(c, "train.epochs", nullptr, 0, &needed));
  EXPECT(needed == 3);

  const auto path = (dir / "cfg.txt").string();
  EXPECT_OK(gs_config_write_file(c, path.c_str()));
  gs_config* d = nullptr;
  EXPECT_OK(gs_config_create(&d));
  EXPECT_OK(gs_config_load_file(d, path.c_str()));
  EXPECT_OK(gs_config_get(d, "train.epochs", buf, sizeof buf, &needed));
  EXPECT(std::strcmp(buf, "42") == 0);
  std::ofstream(dir / "bad.txt") << "train.epochs\n";
  EXPECT(gs_config_load_file(d, (dir / "bad.txt").string().c_str()) == GS_ERR_PARSE);
  gs_config_free(c);
  gs_config_free(d);
}

void test_pipeline(const fs::path& dir) {
  EXPECT(gs_tcn_parameter_count(325, 20, 17) == 125233);
  EXPECT(gs_tcn_parameter_count(0, 20, 17) == 0);

  gs_config* c = nullptr;
  EXPECT_OK(gs_config_create(&c));
  EXPECT_OK(gs_config_set(c, "gen.sequences", "16"));
  EXPECT_OK(gs_config_set(c, "gen.seed", "3"));
  gs_dataset* d = nullptr;
  EXPECT_OK(gs_dataset_generate(c, &d));
  EXPECT(gs_dataset_size(d) == 16);
  const auto data_dir = dir / "data";
  EXPECT_OK(gs_dataset_save(d, data_dir.string().c_str()));
  EXPECT(fs::exists(data_dir / "annotations.txt"));
  EXPECT(fs::exists(data_dir / "manifest.txt"));

  gs_dataset* loaded = nullptr;
  EXPECT_OK(gs_dataset_load(data_dir.string().c_str(), &loaded));
  EXPECT(gs_dataset_size(loaded) == 16);

  gs_predictions* oracle = nullptr;
  EXPECT_OK(gs_predictions_from_dataset(loaded, &oracle));
  EXPECT(gs_predictions_count(oracle) > 16 * 2);
  gs_report* r = nullptr;
  EXPECT_OK(gs_evaluate(loaded, oracle, 0.5, &r));
  gs_aggregate agg{};
  EXPECT_OK(gs_report_aggregate(r, &agg));
  EXPECT(agg.detection_rate == 1.0);
  EXPECT(agg.fp_score == 0.0);
  EXPECT(agg.jaccard == 1.0);
  EXPECT(agg.delay_from_end == 0.0);
  EXPECT(std::strstr(gs_report_to_string(r), "DR") != nullptr);
  EXPECT_OK(gs_report_write_csv(r, (dir / "report.csv").string().c_str()));
  EXPECT(slurp(dir / "report.csv").rfind("scope,name,", 0) == 0);
  const double thr[] = {0.0, 0.5, 0.9};
  EXPECT_OK(gs_sweep_write_csv(loaded, oracle, thr, 3, (dir / "sweep.csv").string().c_str()));
  EXPECT(slurp(dir / "sweep.csv") == "threshold,detection_rate\n0.000000,1.000000\n0.500000,1.000000\n0.900000,1.000000\n");
  const double bad_thr[] = {0.9, 0.1};
  EXPECT(gs_sweep_write_csv(loaded, oracle, bad_thr, 2, (dir / "x.csv").string().c_str()) != GS_OK);

  const auto pred_path = (dir / "oracle.txt").string();
  EXPECT_OK(gs_predictions_save(oracle, pred_path.c_str()));
  gs_predictions* back = nullptr;
  EXPECT_OK(gs_predictions_load(pred_path.c_str(), &back));
  EXPECT(gs_predictions_count(back) == gs_predictions_count(oracle));

  EXPECT_OK(gs_features_dump(loaded, "seq_0000", "angles", (dir / "f.csv").string().c_str()));
  EXPECT(fs::file_size(dir / "f.csv") > 1000);
  EXPECT(gs_features_dump(loaded, "missing", "angles", (dir / "g.csv").string().c_str()) == GS_ERR_INVALID_ARGUMENT);
  EXPECT(gs_features_dump(loaded, "seq_0000", "colors", (dir / "g.csv").string().c_str()) == GS_ERR_INVALID_ARGUMENT);

  // Tiny training run, then detection.
  EXPECT_OK(gs_config_set(c, "train.folds", "2"));
  EXPECT_OK(gs_config_set(c, "train.epochs", "1"));
  gs_model* m = nullptr;
  EXPECT_OK(gs_model_train(loaded, c, &m));
  EXPECT(gs_model_parameter_count(m) == 2 * 125233);
  EXPECT(std::strlen(gs_model_log(m)) > 0);
  const auto model_path = (dir / "model.txt").string();
  EXPECT_OK(gs_model_save(m, model_path.c_str()));
  EXPECT_OK(gs_model_write_curve(m, (dir / "curve.csv").string().c_str()));
  gs_model* m2 = nullptr;
  EXPECT_OK(gs_model_load(model_path.c_str(), &m2));
  EXPECT(gs_model_parameter_count(m2) == gs_model_parameter_count(m));
  gs_config* mc = nullptr;
  EXPECT_OK(gs_model_config(m2, &mc));
  char buf[32];
  size_t needed = 0;
  EXPECT_OK(gs_config_get(mc, "train.folds", buf, sizeof buf, &needed));
  EXPECT(std::strcmp(buf, "2") == 0);

  gs_predictions* p1 = nullptr;
  gs_predictions* p2 = nullptr;
  gs_timing timing{};
  EXPECT_OK(gs_detect(m, loaded, c, &p1, &timing));
  EXPECT_OK(gs_detect(m2, loaded, c, &p2, nullptr));
  EXPECT(timing.steps > 0);
  EXPECT(timing.p50_ms <= timing.p95_ms && timing.p95_ms <= timing.max_ms);
  EXPECT_OK(gs_predictions_save(p1, (dir / "p1.txt").string().c_str()));
  EXPECT_OK(gs_predictions_save(p2, (dir / "p2.txt").string().c_str()));
  EXPECT(slurp(dir / "p1.txt") == slurp(dir / "p2.txt"));
  gs_report* r2 = nullptr;
  EXPECT_OK(gs_evaluate(loaded, p1, 0.5, &r2));
  EXPECT_OK(gs_report_aggregate(r2, &agg));
  EXPECT(std::isnan(agg.detection_rate) || (agg.detection_rate >= 0.0 && agg.detection_rate <= 1.0));

  gs_report_free(r2);
  gs_predictions_free(p1);
  gs_predictions_free(p2);
  gs_config_free(mc);
  gs_model_free(m2);
  gs_model_free(m);
  gs_predictions_free(back);
  gs_report_free(r);
  gs_predictions_free(oracle);
  gs_dataset_free(loaded);
  gs_dataset_free(d);
  gs_config_free(c);
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / ("gesturespot_capi_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  test_errors();
  test_config_buffers(dir);
  test_pipeline(dir);
  fs::remove_all(dir);
  if (failures) {
    std::fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  std::printf("all C API checks passed\n");
  return 0;
}
