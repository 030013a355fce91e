// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace spectra {

/// Failure categories. Values line up with the C API status codes and the
/// CLI exit codes (see spectra.h).
enum class ErrorCode {
  kInternal = 1,
  kIo = 2,
  kFormat = 3,      // schema violation or shape mismatch
  kInvalid = 4,     // bad argument / failed validation
  kSingular = 5,    // normal matrix not invertible with ridge disabled
  kOutOfBounds = 6,
  kNotFound = 7,
  kEstimation = 8,  // registration or matching could not produce a result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Stable lowercase identifier, e.g. "out_of_bounds".
inline const char* errorCodeName(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kInvalid: return "invalid";
    case ErrorCode::kSingular: return "singular";
    case ErrorCode::kOutOfBounds: return "out_of_bounds";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kEstimation: return "estimation";
    case ErrorCode::kInternal: break;
  }
  return "internal";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace spectra
