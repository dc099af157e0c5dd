// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace argsplat {

enum class ErrorCode {
    InvalidParameter,
    NumericalDegeneracy,
    DegenerateMerge,
    InsufficientPopulation,
    InvalidTarget,
    InconsistentSequence,
    NotFullySimplified,
    Inconsistency,
    ShapeMismatch,
    ImageTooSmall,
    Io,
    Format,
    BadMagic,
    BadVersion,
    Truncated,
    Unsupported,
};

const char *toString(ErrorCode code) noexcept;

/// Every failure raised by the core carries one of the codes above; the C API
/// maps them one-to-one onto status values.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), mCode(code) {}

    ErrorCode code() const noexcept { return mCode; }

  private:
    ErrorCode mCode;
};

[[noreturn]] inline void
fail(ErrorCode code, const std::string &what) {
    throw Error(code, what);
}

} // namespace argsplat
