// Copyright 2026 The MTNet Forecasting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtnet/checkpoint.hpp"
#include "mtnet/config.hpp"
#include "mtnet/errors.hpp"
#include "mtnet/training.hpp"

namespace mtnet {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Bad command-line usage (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Every setting a command may read. Everything but the dataset path has a
/// default; config file values are applied first, then command-line flags.
struct RunConfig {
  std::string dataset;
  DataOptions data;
  /// Empty selects every variable of the loaded file.
  std::vector<std::size_t> targets;
  MTNetConfig model;
  TrainConfig train;
  GridSpec grid;
  std::string output_dir;

  RunConfig();
  /// Sets one `key = value` setting; throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);
  /// Reads a flat `key = value` file with '#' comments.
  void load_file(const std::string& path);
  std::string to_text() const;
};

/// Keys accepted by RunConfig::set, in display order.
const std::vector<std::string>& run_config_keys();

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtnet
