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

#include <cstdint>
#include <string>

#include "mtnet/data.hpp"
#include "mtnet/model.hpp"
#include "mtnet/training.hpp"

namespace mtnet {

/// How the dataset was read and split, so evaluation can reproduce it.
struct DataOptions {
  LoadOptions load;
  std::size_t calendar_steps_per_day = 0;  // 0 disables calendar features
  SplitSpec split;
};

struct HistoryDigest {
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double best_valid_loss = 0.0;
  double final_train_loss = 0.0;
  std::string hash;  // FNV-1a of the history CSV
};

/// Self-describing text checkpoint.
///
/// Layout: a "mtnet-checkpoint" magic line, `key = value` lines grouped in
/// [config], [data], [scaler] and [history] sections, then [params] with one
/// "tensor <name> <dims...>" line followed by one line of values per
/// parameter, in name order. Doubles use the shortest representation that
/// round-trips exactly, so save/load preserves predictions bit for bit.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  MTNetConfig config;
  MTNetParams params;
  Scaler scaler;
  DataOptions data;
  HistoryDigest history;
  std::uint64_t seed = 0;
};

HistoryDigest digest(const TrainHistory& history);
std::string history_to_csv(const TrainHistory& history);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Key/value form of the model config shared by checkpoints and config files.
std::string config_to_text(const MTNetConfig& cfg);

}  // namespace mtnet
