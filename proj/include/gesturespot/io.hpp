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

#pragma once

// Text formats.
//
//   sequence:    idx;t_ms;x0;y0;z0;...;x25;y25;z25        (one frame per line)
//   annotation:  seq_id;LABEL;start;end[;LABEL;start;end...]
//   prediction:  seq_id;LABEL;start;end;last_frame_used    (one per line)
//
// Semicolons are written; commas are accepted as separators on read. Floats
// are written in shortest round-trip form so parse/write is lossless.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gesturespot/skeleton.hpp"

namespace gesturespot {

std::string format_double(double v);
double parse_double(std::string_view field);
long long parse_integer(std::string_view field);
// Splits on ';' or ','. Trailing '\r' is stripped by the callers.
std::vector<std::string_view> split_fields(std::string_view line);

GestureSequence parse_sequence_file(std::string_view text, std::string id = {});
std::string write_sequence_file(const GestureSequence& seq);

IntervalMap parse_annotation_file(std::string_view text);
std::string write_annotation_file(const IntervalMap& annotations);

IntervalMap parse_prediction_file(std::string_view text);
std::string write_prediction_file(const IntervalMap& predictions);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// On-disk dataset: <dir>/annotations.txt lists every sequence id (possibly
// with no intervals); frames live in <dir>/sequences/<id>.txt.
struct Dataset {
  std::vector<GestureSequence> sequences;  // sorted by id
  IntervalMap annotations;
};

Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
// Checks intervals against sequence lengths and that every sequence has an
// annotation entry.
void validate_dataset(const Dataset& dataset);

}  // namespace gesturespot
