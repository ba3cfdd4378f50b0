// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "y4k/tensor.hpp"

namespace y4k {

/// Insertion-ordered map from layer-qualified names
/// ("layers.3.primary.weight") to single-precision tensors.
///
/// BN running statistics (names ending in ".running_mean" / ".running_var")
/// are stored weights but not learnable parameters; parameter_count()
/// excludes them, scalar_count() does not.
class WeightStore {
 public:
  using Entry = std::pair<std::string, Tensor>;

  /// Throws Error on duplicate names.
  void insert(std::string name, Tensor value);
  /// Insert or overwrite in place (position kept on overwrite).
  void set(const std::string& name, Tensor value);
  bool erase(const std::string& name);

  const Tensor* find(std::string_view name) const;
  /// Throws MissingWeightError when absent.
  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::int64_t scalar_count() const;
  std::int64_t parameter_count() const;

  static bool is_buffer_name(std::string_view name);

  friend bool operator==(const WeightStore& a, const WeightStore& b) { return a.entries_ == b.entries_; }

 private:
  void reindex();

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace y4k
