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


#include "iltm/config.hpp"

#include "iltm/common.hpp"
#include "iltm/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

namespace iltm {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("repeated key: " + key);
    out.emplace_back(std::move(key), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("not a boolean: " + std::string(s));
}

RunConfig::RunConfig(std::string command, std::vector<ConfigKey> keys)
    : command_(std::move(command)), keys_(std::move(keys)) {
  for (const auto& k : keys_) {
    if (values_.count(k.name)) throw ConfigError("key declared twice: " + k.name);
    values_[k.name] = k.default_value;
  }
}

bool RunConfig::known(const std::string& key) const { return values_.count(key) > 0; }

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known(key)) throw ConfigError("unknown key for " + command_ + ": " + key);
  values_[key] = value;
}

void RunConfig::load_text(std::string_view text) {
  for (const auto& [k, v] : parse_key_values(text)) set(k, v);
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  load_text(text);
}

bool RunConfig::defaulted(const std::string& key) const {
  if (!known(key)) throw ConfigError("unknown key: " + key);
  return values_.at(key) == default_of(key);
}

const std::string& RunConfig::default_of(const std::string& key) const {
  for (const auto& k : keys_) {
    if (k.name == key) return k.default_value;
  }
  throw ConfigError("unknown key: " + key);
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key: " + key);
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& s = get(key);
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(key + ": not an integer: " + s);
  }
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& s = get(key);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(key + ": not a number: " + s);
  }
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  try {
    return parse_bool(get(key));
  } catch (const ConfigError&) {
    throw ConfigError(key + ": not a boolean: " + get(key));
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(key + ": not an unsigned integer: " + s);
  }
  return v;
}

std::string RunConfig::manifest() const {
  std::string out = "# iltm " + version_string() + "\n# command: " + command_ + "\n";
  for (const auto& k : keys_) {
    if (!defaulted(k.name)) out += k.name + "=" + values_.at(k.name) + "\n";
  }
  out += "# defaults\n";
  for (const auto& k : keys_) {
    if (defaulted(k.name)) out += k.name + "=" + values_.at(k.name) + "\n";
  }
  return out;
}

void RunConfig::write_manifest(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << manifest();
  if (!out) throw DataError("cannot write manifest " + path.string());
}

}  // namespace iltm
