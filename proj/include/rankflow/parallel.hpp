/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file parallel.hpp
 *  \brief Minimal row-parallel loop used by every stage.
 *
 *  Work is split into contiguous index ranges; each index is processed by
 *  exactly one thread and callers only write to per-index slots, so results
 *  never depend on the schedule.
 */

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rankflow {

namespace detail {
inline std::atomic<std::size_t>& thread_setting() {
  static std::atomic<std::size_t> value{0};
  return value;
}
}  // namespace detail

/// 0 restores the default (hardware concurrency).
inline void set_thread_count(std::size_t threads) noexcept {
  detail::thread_setting().store(threads);
}

inline std::size_t thread_count() noexcept {
  const std::size_t configured = detail::thread_setting().load();
  if (configured != 0) return configured;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Calls `body(begin, end)` on disjoint chunks covering [0, count).
template <typename ChunkFn>
void parallel_chunks(std::size_t count, ChunkFn&& body) {
  const std::size_t workers = std::min(thread_count(), std::max<std::size_t>(count / 16, 1));
  if (workers <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

template <typename IndexFn>
void parallel_for(std::size_t count, IndexFn&& body) {
  parallel_chunks(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) body(i);
  });
}

}  // namespace rankflow
