/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rankflow {

enum class ErrorKind {
  InvalidInput,       // malformed or out-of-domain data (NaN, bad index, ...)
  Configuration,      // parameter combination that cannot be honoured
  DimensionMismatch,  // structures that disagree on the collection size
  Parse,              // text/binary file could not be decoded
  Io,                 // file could not be opened, read or written
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::Configuration: return "configuration error";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace rankflow
