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


// Flat key=value run configuration with declared keys and manifests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace iltm {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Parses `key=value` lines. Blank lines and lines starting with '#' are
/// skipped; whitespace around keys and values is trimmed. Throws ConfigError
/// on malformed or repeated keys.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

class RunConfig {
 public:
  RunConfig(std::string command, std::vector<ConfigKey> keys);

  const std::string& command() const { return command_; }
  const std::vector<ConfigKey>& keys() const { return keys_; }
  bool known(const std::string& key) const;

  /// Unknown keys throw ConfigError.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::filesystem::path& path);
  void load_text(std::string_view text);

  /// True when the current value equals the declared default.
  bool defaulted(const std::string& key) const;
  const std::string& default_of(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  /// Non-default values first, then every defaulted key, in declaration order.
  std::string manifest() const;
  void write_manifest(const std::filesystem::path& path) const;

 private:
  std::string command_;
  std::vector<ConfigKey> keys_;
  std::map<std::string, std::string> values_;
};

bool parse_bool(std::string_view s);

}  // namespace iltm
