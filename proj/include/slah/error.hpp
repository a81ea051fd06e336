// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace slah {

// Base class for all errors raised by the solver library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input or violated operation precondition.
class InputError : public Error {
  public:
    explicit InputError(const std::string& what) : Error(what) {}
};

// Arithmetic backend failure: process spawn/protocol errors, timeouts,
// "unknown" answers. Never used to encode an unsat verdict.
class BackendError : public Error {
  public:
    explicit BackendError(const std::string& what) : Error(what) {}
};

// A structural invariant that the procedures guarantee was observed to be
// broken; indicates a bug, not a property of the input.
class InternalError : public Error {
  public:
    explicit InternalError(const std::string& what) : Error(what) {}
};

// A configurable resource limit (recursion depth) was exceeded before a
// verdict was reached.
class ResourceError : public Error {
  public:
    explicit ResourceError(const std::string& what) : Error(what) {}
};

}  // namespace slah
