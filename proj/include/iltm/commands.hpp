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


// Runnable workflows behind the command-line tool. Each command declares its
// keys, reads them from a RunConfig and writes its artifacts plus a manifest
// into the `out` directory.
#pragma once

#include "iltm/config.hpp"
#include "iltm/inference.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace iltm {

/// meta-train, fit-predict, evaluate, dedupe, gradcheck, hpo-sample, build-cache.
const std::vector<std::string>& command_names();
std::vector<ConfigKey> command_keys(const std::string& command);
RunConfig make_run_config(const std::string& command);

/// Throws ConfigError, DataError or NumericError; progress goes to `log`.
void run_command(const RunConfig& rc, std::ostream& log);

InferenceConfig inference_config_from(const RunConfig& rc);
GbdtConfig gbdt_config_from(const RunConfig& rc, PsiTag tag);

}  // namespace iltm
