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

#include "iltm/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace iltm {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t read_uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(read_uint(4)); }
  std::uint64_t u64() { return read_uint(8); }
  std::string str() {
    const std::size_t n = u32();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("truncated ILTM container");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Container::put(const std::string& name, const Mat& m) {
  Tensor t;
  t.shape = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  t.data.assign(m.data(), m.data() + m.size());
  tensors_[name] = std::move(t);
}

void Container::put(const std::string& name, std::span<const double> v) {
  tensors_[name] = Tensor{{static_cast<std::uint64_t>(v.size())}, {v.begin(), v.end()}};
}

void Container::put_ints(const std::string& name, std::span<const int> v) {
  Tensor t{{static_cast<std::uint64_t>(v.size())}, {}};
  t.data.reserve(v.size());
  for (int x : v) t.data.push_back(static_cast<double>(x));
  tensors_[name] = std::move(t);
}

void Container::put_scalar(const std::string& name, double v) { tensors_[name] = Tensor{{}, {v}}; }

const Tensor& Container::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw DataError("container has no tensor '" + name + "'");
  return it->second;
}

Mat Container::get_mat(const std::string& name) const {
  const auto& t = get(name);
  if (t.shape.size() != 2) throw DataError("tensor '" + name + "' is not a matrix");
  Mat m(static_cast<Index>(t.shape[0]), static_cast<Index>(t.shape[1]));
  if (m.size() > 0) std::memcpy(m.data(), t.data.data(), t.data.size() * sizeof(double));
  return m;
}

std::vector<double> Container::get_vec(const std::string& name) const { return get(name).data; }

std::vector<int> Container::get_ints(const std::string& name) const {
  const auto& t = get(name);
  std::vector<int> out;
  out.reserve(t.data.size());
  for (double v : t.data) out.push_back(static_cast<int>(v));
  return out;
}

double Container::get_scalar(const std::string& name) const {
  const auto& t = get(name);
  if (t.data.size() != 1) throw DataError("tensor '" + name + "' is not a scalar");
  return t.data[0];
}

const std::string& Container::get_meta(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError("container has no metadata key '" + key + "'");
  return it->second;
}

std::string Container::serialize() const {
  std::string out = "ILTM";
  put_u32(out, kContainerVersion);
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u32(out, static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& [name, t] : tensors_) {
    put_str(out, name);
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_u64(out, d);
    for (double v : t.data) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Container Container::deserialize(std::string_view bytes) {
  Reader in(bytes);
  if (in.raw(4) != "ILTM") throw DataError("not an ILTM container (bad magic)");
  const auto version = in.u32();
  if (version != kContainerVersion) {
    throw DataError("unsupported ILTM container version " + std::to_string(version));
  }
  Container c;
  const auto n_meta = in.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    auto k = in.str();
    c.meta[k] = in.str();
  }
  const auto n_tensors = in.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    auto name = in.str();
    Tensor t;
    const auto ndim = in.u32();
    std::uint64_t count = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      t.shape.push_back(in.u64());
      count *= t.shape.back();
    }
    t.data.resize(count);
    for (auto& v : t.data) v = std::bit_cast<double>(in.u64());
    c.tensors_[name] = std::move(t);
  }
  if (!in.done()) throw DataError("trailing bytes after ILTM container");
  return c;
}

void Container::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const auto bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

Container Container::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace iltm
