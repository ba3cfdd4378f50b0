// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/weight_store.hpp"

namespace y4k {

void WeightStore::insert(std::string name, Tensor value) {
  if (index_.contains(name)) throw Error("duplicate weight name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
}

void WeightStore::set(const std::string& name, Tensor value) {
  if (auto it = index_.find(name); it != index_.end()) {
    entries_[it->second].second = std::move(value);
    return;
  }
  insert(name, std::move(value));
}

bool WeightStore::erase(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) return false;
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(it->second));
  reindex();
  return true;
}

const Tensor* WeightStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

const Tensor& WeightStore::at(std::string_view name) const {
  if (const Tensor* t = find(name)) return *t;
  throw MissingWeightError("weight '" + std::string(name) + "' is not loaded");
}

std::int64_t WeightStore::scalar_count() const {
  std::int64_t total = 0;
  for (const auto& [name, t] : entries_) total += t.numel();
  return total;
}

std::int64_t WeightStore::parameter_count() const {
  std::int64_t total = 0;
  for (const auto& [name, t] : entries_) {
    if (!is_buffer_name(name)) total += t.numel();
  }
  return total;
}

bool WeightStore::is_buffer_name(std::string_view name) {
  return name.ends_with(".running_mean") || name.ends_with(".running_var");
}

void WeightStore::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].first, i);
}

}  // namespace y4k
