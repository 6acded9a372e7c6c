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


// Command-line entry point. Exit codes: 0 success, 2 configuration error,
// 3 data error, 4 numeric failure, 1 anything else.

#include "iltm/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <utility>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string dashed(std::string s) {
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

struct Invocation {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> sets;
};

void add_key_options(CLI::App* sub, const std::vector<iltm::ConfigKey>& keys, Invocation& inv) {
  sub->add_option("--config", inv.config_file, "key=value file (a manifest also works)");
  sub->add_option("--set", inv.sets, "key=value override, repeatable");
  for (const auto& k : keys) {
    const std::string flag = "--" + dashed(k.name);
    const std::string name = k.name;
    if (k.default_value == "true" || k.default_value == "false") {
      sub->add_flag_callback(flag, [&inv, name] { inv.overrides.emplace_back(name, "true"); },
                             k.help + " (default " + k.default_value + ")");
      sub->add_flag_callback("--no-" + dashed(k.name),
                             [&inv, name] { inv.overrides.emplace_back(name, "false"); });
    } else {
      sub->add_option_function<std::string>(
          flag, [&inv, name](const std::string& v) { inv.overrides.emplace_back(name, v); },
          k.help + " (default " + (k.default_value.empty() ? "unset" : k.default_value) + ")");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iltm: hypernetwork-initialized tabular models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", iltm::version_string());

  const std::map<std::string, std::string> summaries{
      {"meta-train", "train the hypernetwork over a directory of tasks"},
      {"fit-predict", "fit a task from a checkpoint and write predictions"},
      {"evaluate", "fit every task in a directory and score one split"},
      {"dedupe", "flag training datasets that overlap evaluation datasets"},
      {"gradcheck", "compare analytic and finite-difference gradients"},
      {"hpo-sample", "draw inference hyperparameters from the search space"},
      {"build-cache", "precompute per-task embeddings for meta-training"},
  };
  std::map<std::string, Invocation> invocations;
  for (const auto& name : iltm::command_names()) {
    const auto it = summaries.find(name);
    auto* sub = app.add_subcommand(name, it == summaries.end() ? std::string{} : it->second);
    add_key_options(sub, iltm::command_keys(name), invocations[name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    const Invocation& inv = invocations.at(command);
    iltm::RunConfig rc = iltm::make_run_config(command);
    if (!inv.config_file.empty()) rc.load_file(inv.config_file);
    for (const auto& s : inv.sets) {
      const auto kv = iltm::parse_key_values(s);
      if (kv.size() != 1) throw iltm::ConfigError("--set expects key=value");
      rc.set(kv[0].first, kv[0].second);
    }
    for (const auto& [k, v] : inv.overrides) rc.set(k, v);
    iltm::run_command(rc, std::cout);
    return 0;
  } catch (const iltm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const iltm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const iltm::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
