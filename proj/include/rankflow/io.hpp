/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file io.hpp
 *  \brief Text and binary readers/writers for features, distances, labels,
 *  ranked lists and embeddings. Formats are described in docs/formats.md.
 */

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rankflow/features.hpp"
#include "rankflow/metrics.hpp"
#include "rankflow/rank_core.hpp"

namespace rankflow::io {

// ---------------------------------------------------------------------------
// Little-endian primitives

inline void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (std::size_t b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  out.write(bytes.data(), bytes.size());
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> bytes{};
  for (std::size_t b = 0; b < 4; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  out.write(bytes.data(), bytes.size());
}

inline void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline void read_exact(std::istream& in, char* data, std::size_t size) {
  in.read(data, static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in.gcount()) != size) fail(ErrorKind::Parse, "unexpected end of binary input");
}

inline std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  read_exact(in, reinterpret_cast<char*>(bytes.data()), bytes.size());
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return v;
}

inline std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> bytes{};
  read_exact(in, reinterpret_cast<char*>(bytes.data()), bytes.size());
  std::uint32_t v = 0;
  for (std::size_t b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[b]) << (8 * b);
  return v;
}

inline std::uint8_t get_u8(std::istream& in) {
  char c = 0;
  read_exact(in, &c, 1);
  return static_cast<std::uint8_t>(c);
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }
inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

// ---------------------------------------------------------------------------
// Text helpers

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Splits on commas when the line has any, otherwise on runs of blanks.
inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  line = trim(line);
  if (line.empty()) return out;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      out.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

inline double parse_double(std::string_view field, std::string_view source, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    fail(ErrorKind::Parse, where(source, line) + "cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

inline std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

// ---------------------------------------------------------------------------
// Features

enum class FeatureFormat { Auto, Text, Binary };

/// Header line first. When the first header field is `id`, the first column
/// carries unique object identifiers.
inline FeatureTable read_features_text(std::istream& in, std::string_view source = "<features>") {
  FeatureTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header_line = line;
      header = split_fields(header_line);
      break;
    }
  }
  if (header.empty()) fail(ErrorKind::Parse, std::string(source) + ": missing header line");
  const bool has_ids = header.front() == "id" || header.front() == "ID" || header.front() == "Id";
  const std::size_t columns = header.size();
  table.dims = columns - (has_ids ? 1 : 0);
  if (table.dims == 0) fail(ErrorKind::Parse, where(source, line_no) + "header declares no feature columns");

  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != columns) {
      fail(ErrorKind::Parse, where(source, line_no) + "expected " + std::to_string(columns) + " fields, found " +
                                 std::to_string(fields.size()));
    }
    std::size_t first = 0;
    if (has_ids) {
      std::string id(fields[0]);
      if (!seen.emplace(id, table.rows).second) {
        fail(ErrorKind::Parse, where(source, line_no) + "duplicate identifier '" + id + "'");
      }
      table.ids.push_back(std::move(id));
      first = 1;
    }
    for (std::size_t f = first; f < fields.size(); ++f) {
      const double v = parse_double(fields[f], source, line_no);
      if (!std::isfinite(v)) {
        fail(ErrorKind::Parse, where(source, line_no) + "non-finite value in row " + std::to_string(table.rows));
      }
      table.values.push_back(v);
    }
    ++table.rows;
  }
  return table;
}

/// uint64 n, uint64 d, then n*d float32, all little-endian.
inline FeatureTable read_features_binary(std::istream& in, std::string_view source = "<features>") {
  FeatureTable table;
  table.rows = get_u64(in);
  table.dims = get_u64(in);
  if (table.dims == 0 && table.rows > 0) fail(ErrorKind::Parse, std::string(source) + ": zero feature dimension");
  table.values.resize(table.rows * table.dims);
  for (std::size_t i = 0; i < table.rows; ++i) {
    for (std::size_t d = 0; d < table.dims; ++d) {
      const double v = get_f32(in);
      if (!std::isfinite(v)) {
        fail(ErrorKind::Parse, std::string(source) + ": non-finite value in row " + std::to_string(i));
      }
      table.values[i * table.dims + d] = v;
    }
  }
  return table;
}

inline void write_features_text(std::ostream& out, const FeatureTable& table) {
  const bool has_ids = !table.ids.empty();
  if (has_ids) out << "id";
  for (std::size_t d = 0; d < table.dims; ++d) out << (d == 0 && !has_ids ? "" : ",") << 'f' << d;
  out << '\n';
  for (std::size_t i = 0; i < table.rows; ++i) {
    if (has_ids) out << table.ids[i];
    for (std::size_t d = 0; d < table.dims; ++d)
      out << (d == 0 && !has_ids ? "" : ",") << format_double(table.row(i)[d]);
    out << '\n';
  }
}

inline void write_features_binary(std::ostream& out, const FeatureTable& table) {
  put_u64(out, table.rows);
  put_u64(out, table.dims);
  for (double v : table.values) put_f32(out, static_cast<float>(v));
}

inline FeatureTable load_features(const std::string& path, FeatureFormat format = FeatureFormat::Auto) {
  if (format == FeatureFormat::Auto) {
    const bool binary = path.ends_with(".bin") || path.ends_with(".f32");
    format = binary ? FeatureFormat::Binary : FeatureFormat::Text;
  }
  auto in = open_in(path, format == FeatureFormat::Binary);
  return format == FeatureFormat::Binary ? read_features_binary(in, path) : read_features_text(in, path);
}

// ---------------------------------------------------------------------------
// Distance matrices: n lines of n numbers (query-major).

inline std::vector<DistanceRow> read_distance_matrix(std::istream& in, std::string_view source = "<distances>") {
  std::vector<DistanceRow> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (rows.empty()) width = fields.size();
    if (fields.size() != width) {
      fail(ErrorKind::Parse, where(source, line_no) + "expected " + std::to_string(width) + " distances, found " +
                                 std::to_string(fields.size()));
    }
    DistanceRow row;
    row.reserve(width);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const double d = parse_double(fields[j], source, line_no);
      if (std::isnan(d)) fail(ErrorKind::Parse, where(source, line_no) + "NaN distance");
      row.emplace_back(static_cast<Index>(j), d);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<DistanceRow> load_distance_matrix(const std::string& path) {
  auto in = open_in(path);
  return read_distance_matrix(in, path);
}

// ---------------------------------------------------------------------------
// Labels: `<id> <label>` per line (comma or blank separated). A first line of
// `id,label` is treated as a header.

struct LabelTable {
  std::vector<std::pair<std::string, std::string>> entries;

  /// Integer class per identifier, numbered by first appearance of each label.
  std::vector<RelevanceOracle::Label> classes_for(const std::vector<std::string>& ids) const {
    std::unordered_map<std::string, std::string> by_id;
    for (const auto& [id, label] : entries) by_id.emplace(id, label);
    std::unordered_map<std::string, RelevanceOracle::Label> numbering;
    for (const auto& [id, label] : entries) numbering.emplace(label, static_cast<RelevanceOracle::Label>(numbering.size()));
    std::vector<RelevanceOracle::Label> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) fail(ErrorKind::InvalidInput, "no label for object '" + id + "'");
      out.push_back(numbering.at(it->second));
    }
    return out;
  }
};

inline LabelTable read_labels(std::istream& in, std::string_view source = "<labels>") {
  LabelTable table;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 2) fail(ErrorKind::Parse, where(source, line_no) + "expected '<id> <label>'");
    if (table.entries.empty() && fields[0] == "id" && fields[1] == "label") continue;
    std::string id(fields[0]);
    if (!seen.emplace(id, line_no).second) {
      fail(ErrorKind::Parse, where(source, line_no) + "duplicate identifier '" + id + "'");
    }
    table.entries.emplace_back(std::move(id), std::string(fields[1]));
  }
  return table;
}

inline LabelTable load_labels(const std::string& path) {
  auto in = open_in(path);
  return read_labels(in, path);
}

// ---------------------------------------------------------------------------
// Ranked lists: `<query_id>: <id_1> <id_2> ...`

inline void write_ranked_lists(std::ostream& out, const RankedListSet& lists, const std::vector<std::string>& ids,
                               const std::vector<std::string>& query_ids = {}) {
  auto name = [](const std::vector<std::string>& names, std::size_t i) {
    return names.empty() ? std::to_string(i) : names.at(i);
  };
  for (const auto& list : lists.lists) {
    out << name(query_ids.empty() ? ids : query_ids, list.owner) << ':';
    for (const auto& e : list.entries) out << ' ' << name(ids, e.object);
    out << '\n';
  }
}

struct RankedListFile {
  RankedListSet lists;
  std::vector<std::string> ids;  // object identifier per index
};

/// Object indices follow the order of the query lines unless `ids` is given.
/// Entry scores are set to 1/position.
inline RankedListFile read_ranked_lists(std::istream& in, std::string_view source = "<lists>",
                                        std::vector<std::string> ids = {}) {
  std::vector<std::pair<std::string, std::vector<std::string>>> raw;
  std::vector<std::size_t> line_of;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) fail(ErrorKind::Parse, where(source, line_no) + "missing ':' after query id");
    std::string query(trim(std::string_view(line).substr(0, colon)));
    if (query.empty()) fail(ErrorKind::Parse, where(source, line_no) + "empty query id");
    std::vector<std::string> members;
    for (auto f : split_fields(std::string_view(line).substr(colon + 1))) members.emplace_back(f);
    raw.emplace_back(std::move(query), std::move(members));
    line_of.push_back(line_no);
  }
  RankedListFile file;
  if (ids.empty()) {
    for (const auto& [query, members] : raw) ids.push_back(query);
  }
  std::unordered_map<std::string, Index> index_of;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index_of.emplace(ids[i], static_cast<Index>(i)).second) {
      fail(ErrorKind::Parse, std::string(source) + ": duplicate identifier '" + ids[i] + "'");
    }
  }
  const std::size_t n = ids.size();
  file.lists.n = n;
  file.lists.lists.resize(n);
  std::vector<unsigned char> seen_query(n, 0);
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto& [query, members] = raw[r];
    auto q = index_of.find(query);
    if (q == index_of.end()) fail(ErrorKind::Parse, where(source, line_of[r]) + "unknown query id '" + query + "'");
    if (seen_query[q->second]) fail(ErrorKind::Parse, where(source, line_of[r]) + "query '" + query + "' listed twice");
    seen_query[q->second] = 1;
    auto& list = file.lists.lists[q->second];
    list.owner = q->second;
    for (std::size_t p = 0; p < members.size(); ++p) {
      auto it = index_of.find(members[p]);
      if (it == index_of.end()) {
        fail(ErrorKind::Parse, where(source, line_of[r]) + "unknown object id '" + members[p] + "'");
      }
      list.entries.push_back({it->second, 1.0 / static_cast<double>(p + 1)});
    }
    file.lists.depth = std::max(file.lists.depth, list.entries.size());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen_query[i]) fail(ErrorKind::Parse, std::string(source) + ": no ranked list for '" + ids[i] + "'");
  }
  file.lists.validate();
  file.ids = std::move(ids);
  return file;
}

inline RankedListFile load_ranked_lists(const std::string& path, std::vector<std::string> ids = {}) {
  auto in = open_in(path);
  return read_ranked_lists(in, path, std::move(ids));
}

// ---------------------------------------------------------------------------
// Embeddings: `<id>,<v_1>,...,<v_m>` per object, shortest round-trip decimals.

inline void write_embeddings(std::ostream& out, const DenseMatrix& values, const std::vector<std::string>& ids) {
  for (std::size_t i = 0; i < values.rows; ++i) {
    out << (ids.empty() ? std::to_string(i) : ids.at(i));
    for (double v : values.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

struct EmbeddingFile {
  DenseMatrix values;
  std::vector<std::string> ids;
};

inline EmbeddingFile read_embeddings(std::istream& in, std::string_view source = "<embeddings>") {
  EmbeddingFile file;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (first) {
      width = fields.size() - 1;
      first = false;
    }
    if (fields.size() - 1 != width) {
      fail(ErrorKind::Parse, where(source, line_no) + "expected " + std::to_string(width) + " embedding values");
    }
    file.ids.emplace_back(fields[0]);
    for (std::size_t f = 1; f < fields.size(); ++f) values.push_back(parse_double(fields[f], source, line_no));
  }
  file.values.rows = file.ids.size();
  file.values.cols = width;
  file.values.values = std::move(values);
  return file;
}

}  // namespace rankflow::io
