// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace y4k {

/// Root of every error the engine raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or block shape contract violated.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid model configuration. `layer()` is -1 when the error is not tied
/// to a single layer.
class ConfigError : public Error {
 public:
  ConfigError(int layer, const std::string& what)
      : Error(layer >= 0 ? "layer " + std::to_string(layer) + ": " + what : what),
        layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

/// Malformed weight container.
class FormatError : public Error {
 public:
  enum class Kind { kBadMagic, kUnsupportedVersion, kTruncated, kBadManifest, kInconsistent, kIo };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Bad user data: missing files, malformed label lines, out-of-range values.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A weight required by a forward pass is absent from the store.
class MissingWeightError : public Error {
 public:
  using Error::Error;
};

/// Backward requested through an op that has no analytic gradient.
class UnsupportedOpError : public Error {
 public:
  using Error::Error;
};

}  // namespace y4k
