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

#include "gesturespot/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gesturespot {

namespace {

constexpr int kSequenceFields = 2 + 3 * kNumJoints;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    ++line_no;
    line = trim(line);
    if (!line.empty()) fn(line, line_no);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

Error parse_error(int line_no, const std::string& what) {
  return Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + what);
}

int parse_frame_index(std::string_view field, int line_no) {
  long long v = 0;
  try {
    v = parse_integer(field);
  } catch (const Error& e) {
    throw parse_error(line_no, e.what());
  }
  if (v < 0 || v > 1'000'000'000) throw parse_error(line_no, "frame index out of range");
  return static_cast<int>(v);
}

void check_seq_id(std::string_view id, int line_no) {
  if (id.empty()) throw parse_error(line_no, "empty sequence id");
  if (id == "." || id == ".." || id.find_first_of("/\\") != std::string_view::npos)
    throw parse_error(line_no, "sequence id '" + std::string(id) + "' is not a valid file name");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field) {
  field = trim(field);
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != last)
    throw Error(ErrorKind::kParse, "not a number: '" + std::string(field) + "'");
  return v;
}

long long parse_integer(std::string_view field) {
  field = trim(field);
  long long v = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw Error(ErrorKind::kParse, "not an integer: '" + std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ';' || line[i] == ',') {
      out.push_back(trim(line.substr(begin, i - begin)));
      begin = i + 1;
    }
  }
  return out;
}

GestureSequence parse_sequence_file(std::string_view text, std::string id) {
  GestureSequence seq;
  seq.id = std::move(id);
  for_each_line(text, [&](std::string_view line, int line_no) {
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != kSequenceFields)
      throw parse_error(line_no, "wrong field count: expected " + std::to_string(kSequenceFields) + ", got " +
                                     std::to_string(fields.size()));
    const int idx = parse_frame_index(fields[0], line_no);
    if (idx != seq.size())
      throw parse_error(line_no, "frame index " + std::to_string(idx) + " out of sequence (expected " +
                                     std::to_string(seq.size()) + ")");
    SkeletonFrame frame;
    try {
      frame.timestamp_ms = parse_integer(fields[1]);
      for (int j = 0; j < kNumJoints; ++j)
        for (int c = 0; c < 3; ++c) frame.joints[j][c] = parse_double(fields[2 + 3 * j + c]);
    } catch (const Error& e) {
      throw parse_error(line_no, e.what());
    }
    if (frame.timestamp_ms < 0) throw parse_error(line_no, "negative timestamp");
    if (!seq.frames.empty() && frame.timestamp_ms <= seq.frames.back().timestamp_ms)
      throw parse_error(line_no, "timestamps not strictly increasing");
    for (const auto& j : frame.joints)
      if (!j.allFinite()) throw parse_error(line_no, "non-finite coordinate");
    seq.frames.push_back(frame);
  });
  if (seq.frames.empty()) throw Error(ErrorKind::kParse, "sequence file holds no frames");
  return seq;
}

std::string write_sequence_file(const GestureSequence& seq) {
  std::string out;
  out.reserve(seq.frames.size() * 1200);
  for (int t = 0; t < seq.size(); ++t) {
    const auto& f = seq.frames[static_cast<std::size_t>(t)];
    out += std::to_string(t);
    out += ';';
    out += std::to_string(f.timestamp_ms);
    for (const auto& j : f.joints)
      for (int c = 0; c < 3; ++c) {
        out += ';';
        out += format_double(j[c]);
      }
    out += '\n';
  }
  return out;
}

IntervalMap parse_annotation_file(std::string_view text) {
  IntervalMap out;
  for_each_line(text, [&](std::string_view line, int line_no) {
    const auto fields = split_fields(line);
    check_seq_id(fields[0], line_no);
    if ((fields.size() - 1) % 3 != 0)
      throw parse_error(line_no, "annotation fields must come in LABEL;start;end triplets");
    const std::string id(fields[0]);
    if (out.count(id)) throw parse_error(line_no, "duplicate sequence id '" + id + "'");
    std::vector<GestureInterval> intervals;
    for (std::size_t i = 1; i < fields.size(); i += 3) {
      const auto label = parse_label(fields[i]);
      if (!label || !is_gesture(*label))
        throw parse_error(line_no, "unknown gesture label '" + std::string(fields[i]) + "'");
      GestureInterval g;
      g.label = *label;
      g.start = parse_frame_index(fields[i + 1], line_no);
      g.end = parse_frame_index(fields[i + 2], line_no);
      if (g.end < g.start) throw parse_error(line_no, "inverted interval (end < start)");
      intervals.push_back(g);
    }
    std::stable_sort(intervals.begin(), intervals.end(),
                     [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < intervals.size(); ++i)
      if (overlap_frames(intervals[i - 1], intervals[i]) > 0)
        throw parse_error(line_no, "overlapping ground-truth intervals");
    out.emplace(id, std::move(intervals));
  });
  return out;
}

std::string write_annotation_file(const IntervalMap& annotations) {
  std::string out;
  for (const auto& [id, intervals] : annotations) {
    out += id;
    for (const auto& g : intervals) {
      out += ';';
      out += label_name(g.label);
      out += ';' + std::to_string(g.start) + ';' + std::to_string(g.end);
    }
    out += '\n';
  }
  return out;
}

IntervalMap parse_prediction_file(std::string_view text) {
  IntervalMap out;
  for_each_line(text, [&](std::string_view line, int line_no) {
    const auto fields = split_fields(line);
    if (fields.size() != 5)
      throw parse_error(line_no, "prediction record needs 5 fields (seq_id;LABEL;start;end;last_frame_used), got " +
                                     std::to_string(fields.size()));
    check_seq_id(fields[0], line_no);
    const auto label = parse_label(fields[1]);
    if (!label || !is_gesture(*label))
      throw parse_error(line_no, "unknown gesture label '" + std::string(fields[1]) + "'");
    GestureInterval g;
    g.label = *label;
    g.start = parse_frame_index(fields[2], line_no);
    g.end = parse_frame_index(fields[3], line_no);
    g.last_frame_used = parse_frame_index(fields[4], line_no);
    if (g.end < g.start) throw parse_error(line_no, "inverted interval (end < start)");
    out[std::string(fields[0])].push_back(g);
  });
  return out;
}

std::string write_prediction_file(const IntervalMap& predictions) {
  std::string out;
  for (const auto& [id, intervals] : predictions)
    for (const auto& g : intervals) {
      if (!g.last_frame_used)
        throw Error(ErrorKind::kValidation, "prediction in '" + id + "' lacks last_frame_used");
      out += id;
      out += ';';
      out += label_name(g.label);
      out += ';' + std::to_string(g.start) + ';' + std::to_string(g.end) + ';' +
             std::to_string(*g.last_frame_used) + '\n';
    }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create directory for '" + path.string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

void validate_dataset(const Dataset& dataset) {
  std::set<std::string> seen;
  for (const auto& seq : dataset.sequences) {
    if (!seen.insert(seq.id).second) throw Error(ErrorKind::kValidation, "duplicate sequence id '" + seq.id + "'");
    const auto it = dataset.annotations.find(seq.id);
    if (it == dataset.annotations.end())
      throw Error(ErrorKind::kValidation, "sequence '" + seq.id + "' has no annotation entry");
    try {
      validate_annotations(it->second, seq.size(), false);
    } catch (const Error& e) {
      throw Error(ErrorKind::kValidation, "sequence '" + seq.id + "': " + e.what());
    }
  }
  for (const auto& [id, _] : dataset.annotations)
    if (!seen.count(id)) throw Error(ErrorKind::kValidation, "annotated sequence '" + id + "' has no frames");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.annotations = parse_annotation_file(read_text_file(dir / "annotations.txt"));
  for (const auto& [id, _] : ds.annotations) {
    const auto path = dir / "sequences" / (id + ".txt");
    try {
      ds.sequences.push_back(parse_sequence_file(read_text_file(path), id));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ": " + e.what());
    }
  }
  validate_dataset(ds);
  return ds;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  validate_dataset(dataset);
  for (const auto& seq : dataset.sequences)
    write_text_file(dir / "sequences" / (seq.id + ".txt"), write_sequence_file(seq));
  write_text_file(dir / "annotations.txt", write_annotation_file(dataset.annotations));
}

}  // namespace gesturespot
