# Copyright 2026 The iltm Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Hypernetwork tabular learner."""

from ._core import (
    ConfigError,
    DataError,
    Model,
    NumericError,
    __version__,
    clean_keywords,
    command_keys,
    command_names,
    default_hyperparams,
    gradcheck,
    levenshtein_similarity,
    run_command,
    sample_hyperparams,
    sanitize_name,
    token_sort_ratio,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Model",
    "NumericError",
    "__version__",
    "clean_keywords",
    "command_keys",
    "command_names",
    "default_hyperparams",
    "gradcheck",
    "levenshtein_similarity",
    "run_command",
    "sample_hyperparams",
    "sanitize_name",
    "token_sort_ratio",
]
