/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file index_io.hpp
 *  \brief Versioned little-endian container for RfeIndex. The byte layout is
 *  documented in docs/formats.md.
 */

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "rankflow/io.hpp"
#include "rankflow/pipeline.hpp"

namespace rankflow::io {

inline constexpr std::array<char, 8> kIndexMagic = {'R', 'F', 'E', 'I', 'D', 'X', '\0', '\0'};
inline constexpr std::uint32_t kIndexVersion = 1;

/// An index together with the object identifiers it was built over.
struct StoredIndex {
  RfeIndex index;
  std::vector<std::string> ids;  // empty, or one per indexed object

  friend bool operator==(const StoredIndex&, const StoredIndex&) = default;
};

namespace detail {
inline void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const std::uint64_t size = get_u64(in);
  if (size > (1u << 20)) fail(ErrorKind::Parse, "index: identifier longer than 1 MiB");
  std::string s(size, '\0');
  read_exact(in, s.data(), size);
  return s;
}

inline void put_sparse(std::ostream& out, const SparseScoreMatrix& m) {
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    put_u64(out, row.size());
    for (const auto& e : row) {
      put_u32(out, e.column);
      put_f64(out, e.value);
    }
  }
}

/// Guards allocations against corrupt counts.
inline std::uint64_t checked_count(std::uint64_t count, std::uint64_t limit, const char* what) {
  if (count > limit) fail(ErrorKind::Parse, std::string("index: implausible ") + what + " count");
  return count;
}

inline SparseScoreMatrix get_sparse(std::istream& in) {
  const std::uint64_t rows = checked_count(get_u64(in), 1ull << 32, "row");
  const std::uint64_t cols = checked_count(get_u64(in), 1ull << 32, "column");
  SparseScoreMatrix m(rows, cols);
  for (std::uint64_t i = 0; i < rows; ++i) {
    const std::uint64_t count = checked_count(get_u64(in), cols, "row entry");
    std::vector<SparseEntry> row(count);
    for (auto& e : row) {
      e.column = get_u32(in);
      e.value = get_f64(in);
    }
    m.set_row(i, std::move(row));
  }
  return m;
}
}  // namespace detail

inline void write_index(std::ostream& out, const StoredIndex& stored) {
  const RfeIndex& index = stored.index;
  const RfeConfig& c = index.config;
  out.write(kIndexMagic.data(), kIndexMagic.size());
  put_u32(out, kIndexVersion);
  std::uint32_t flags = 0;
  if (index.embeddings) flags |= 1u;
  if (!stored.ids.empty()) flags |= 2u;
  put_u32(out, flags);

  put_u64(out, c.k);
  put_u64(out, c.depth);
  put_f64(out, c.alpha);
  put_u64(out, c.iterations);
  put_u8(out, c.run_cc_stage);
  put_u8(out, c.emit_embeddings);
  put_u8(out, c.normalize_embeddings);
  put_u8(out, static_cast<std::uint8_t>(c.rank_factor));
  put_u8(out, static_cast<std::uint8_t>(c.threshold_mode));

  put_u64(out, index.lists.n);
  put_u64(out, index.lists.depth);
  for (const auto& list : index.lists.lists) {
    put_u32(out, list.owner);
    put_u64(out, list.entries.size());
    for (const auto& e : list.entries) {
      put_u32(out, e.object);
      put_f64(out, e.score);
    }
  }

  put_u64(out, index.state.k);
  detail::put_sparse(out, index.state.incidence);
  detail::put_sparse(out, index.state.embeddings);
  put_u64(out, index.state.edge_weights.size());
  for (double w : index.state.edge_weights) put_f64(out, w);

  if (index.embeddings) {
    put_u64(out, index.embeddings->rows);
    put_u64(out, index.embeddings->cols);
    for (double v : index.embeddings->values) put_f64(out, v);
  }
  if (!stored.ids.empty()) {
    put_u64(out, stored.ids.size());
    for (const auto& id : stored.ids) detail::put_string(out, id);
  }
  if (!out) fail(ErrorKind::Io, "index: write failed");
}

inline StoredIndex read_index(std::istream& in) {
  std::array<char, 8> magic{};
  read_exact(in, magic.data(), magic.size());
  if (magic != kIndexMagic) fail(ErrorKind::Parse, "index: bad magic, not an RFE index file");
  const std::uint32_t version = get_u32(in);
  if (version != kIndexVersion) {
    fail(ErrorKind::Parse, "index: unsupported version " + std::to_string(version));
  }
  const std::uint32_t flags = get_u32(in);
  if (flags & ~3u) fail(ErrorKind::Parse, "index: unknown flags");

  StoredIndex stored;
  RfeIndex& index = stored.index;
  RfeConfig& c = index.config;
  c.k = get_u64(in);
  c.depth = get_u64(in);
  c.alpha = get_f64(in);
  c.iterations = get_u64(in);
  c.run_cc_stage = get_u8(in) != 0;
  c.emit_embeddings = get_u8(in) != 0;
  c.normalize_embeddings = get_u8(in) != 0;
  const auto factor = get_u8(in);
  const auto threshold = get_u8(in);
  if (factor > 1 || threshold > 1) fail(ErrorKind::Parse, "index: bad enum value in configuration");
  c.rank_factor = static_cast<RankFactor>(factor);
  c.threshold_mode = static_cast<ThresholdMode>(threshold);

  const std::uint64_t n = detail::checked_count(get_u64(in), 1ull << 32, "object");
  index.lists.n = n;
  index.lists.depth = get_u64(in);
  index.lists.lists.resize(n);
  for (auto& list : index.lists.lists) {
    list.owner = get_u32(in);
    const std::uint64_t len = detail::checked_count(get_u64(in), n, "list entry");
    list.entries.resize(len);
    for (auto& e : list.entries) {
      e.object = get_u32(in);
      e.score = get_f64(in);
    }
  }
  index.lists.validate();

  index.state.k = get_u64(in);
  index.state.incidence = detail::get_sparse(in);
  index.state.embeddings = detail::get_sparse(in);
  const std::uint64_t weights = detail::checked_count(get_u64(in), 1ull << 32, "weight");
  index.state.edge_weights.resize(weights);
  for (double& w : index.state.edge_weights) w = get_f64(in);
  const auto& hm = index.state.incidence;
  const auto& h = index.state.embeddings;
  if (hm.rows() != n || hm.cols() != n || h.rows() != n || h.cols() != n || weights != n) {
    fail(ErrorKind::Parse, "index: hypergraph dimensions disagree with the ranked lists");
  }

  if (flags & 1u) {
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = detail::checked_count(get_u64(in), n, "embedding column");
    if (rows != n) fail(ErrorKind::Parse, "index: embedding rows disagree with the ranked lists");
    DenseMatrix m(rows, cols);
    for (double& v : m.values) v = get_f64(in);
    index.embeddings = std::move(m);
  }
  if (flags & 2u) {
    const std::uint64_t count = get_u64(in);
    if (count != n) fail(ErrorKind::Parse, "index: identifier count disagrees with the ranked lists");
    stored.ids.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) stored.ids.push_back(detail::get_string(in));
  }
  return stored;
}

inline void save_index(const std::string& path, const StoredIndex& stored) {
  auto out = open_out(path, true);
  write_index(out, stored);
}

inline StoredIndex load_index(const std::string& path) {
  auto in = open_in(path, true);
  return read_index(in);
}

}  // namespace rankflow::io
