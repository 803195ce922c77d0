// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace roomreid {

/// Malformed or inconsistent input data (manifests, indexes, feature sets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public DataError {
 public:
  DimensionMismatch(const std::string& what, std::size_t expected, std::size_t actual);
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class NotFoundError : public DataError {
 public:
  using DataError::DataError;
};

/// Base for on-disk format failures.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedFile : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

/// A provider (patch features, fine matcher) failed for a specific stage and image.
class ProviderError : public std::runtime_error {
 public:
  ProviderError(std::string stage, std::string image_id, const std::string& cause);
  const std::string& stage() const noexcept { return stage_; }
  const std::string& image_id() const noexcept { return image_id_; }

 private:
  std::string stage_;
  std::string image_id_;
};

/// An internal invariant was violated; indicates a bug rather than bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace roomreid
