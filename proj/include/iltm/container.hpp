/*
 * Copyright 2026 The iltm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Versioned binary container for checkpoints, fitted models and task caches.
//
// Layout (all integers little-endian):
//   "ILTM" | u32 format version
//   u32 metadata count, then per entry: u32 key len, key, u32 value len, value
//   u32 tensor count, then per tensor:
//     u32 name len, name, u32 ndim, u64 dims[ndim], f64 data[prod(dims)]
// Metadata and tensors are written in sorted name order, so identical
// contents always produce identical bytes.
#pragma once

#include "iltm/common.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace iltm {

inline constexpr std::uint32_t kContainerVersion = 1;

struct Tensor {
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
};

class Container {
 public:
  std::map<std::string, std::string> meta;

  void put(const std::string& name, const Mat& m);
  void put(const std::string& name, std::span<const double> v);
  void put_ints(const std::string& name, std::span<const int> v);
  void put_scalar(const std::string& name, double v);

  bool has(const std::string& name) const { return tensors_.count(name) > 0; }
  const Tensor& get(const std::string& name) const;
  Mat get_mat(const std::string& name) const;
  std::vector<double> get_vec(const std::string& name) const;
  std::vector<int> get_ints(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  const std::string& get_meta(const std::string& key) const;

  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  std::string serialize() const;
  static Container deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static Container load(const std::filesystem::path& path);

 private:
  std::map<std::string, Tensor> tensors_;
};

}  // namespace iltm
