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

#include <string>

namespace mtnet {

/// Writes `content` to `path` via a temporary file and rename, so readers
/// never observe a partial file under the final name.
void atomic_write(const std::string& path, const std::string& content);

/// Shortest round-trippable decimal form, at most 17 significant digits.
std::string format_double(double v);

/// Fixed 17-significant-digit form; exact for every finite double.
std::string format_double17(double v);

}  // namespace mtnet
