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

#include "mtnet/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mtnet/errors.hpp"
#include "mtnet/io.hpp"

namespace mtnet {

namespace {

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

std::string join_doubles(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double17(v[i]);
  }
  return s;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw ParseError("checkpoint: bad number in " + what);
    out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(tok, &used));
      if (used != tok.size()) throw ParseError("");
    } catch (const std::exception&) {
      throw ParseError("checkpoint: bad integer in " + what);
    }
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

using Section = std::map<std::string, std::string>;

const std::string& need(const Section& s, const std::string& key, const std::string& section) {
  auto it = s.find(key);
  if (it == s.end()) throw ParseError("checkpoint: missing " + section + "." + key);
  return it->second;
}

std::size_t need_size(const Section& s, const std::string& key, const std::string& section) {
  const auto v = parse_sizes(need(s, key, section), section + "." + key);
  if (v.size() != 1) throw ParseError("checkpoint: expected one integer for " + section + "." + key);
  return v[0];
}

double need_double(const Section& s, const std::string& key, const std::string& section) {
  const auto v = parse_doubles(need(s, key, section), section + "." + key);
  if (v.size() != 1) throw ParseError("checkpoint: expected one number for " + section + "." + key);
  return v[0];
}

}  // namespace

std::string history_to_csv(const TrainHistory& history) {
  std::ostringstream os;
  os << "epoch,train_loss,valid_loss\n";
  for (const EpochRecord& e : history.epochs) {
    os << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.valid_loss)
       << '\n';
  }
  return os.str();
}

HistoryDigest digest(const TrainHistory& history) {
  HistoryDigest d;
  d.epochs = history.epochs.size();
  d.best_epoch = history.best_epoch;
  d.best_valid_loss = history.best_valid_loss;
  d.final_train_loss = history.epochs.empty() ? 0.0 : history.epochs.back().train_loss;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(history_to_csv(history))));
  d.hash = buf;
  return d;
}

std::string config_to_text(const MTNetConfig& c) {
  std::ostringstream os;
  os << "memory_blocks = " << c.memory_blocks << '\n'
     << "window = " << c.window << '\n'
     << "horizon = " << c.horizon << '\n'
     << "variables = " << c.variables << '\n'
     << "targets = " << join_sizes(c.targets) << '\n'
     << "hidden = " << c.hidden << '\n'
     << "filters = " << c.filters << '\n'
     << "kernel_width = " << c.kernel_width << '\n'
     << "ar_window = " << c.ar_window << '\n'
     << "dropout = " << format_double(c.dropout_rate) << '\n';
  return os.str();
}

std::string serialize_checkpoint(const Checkpoint& ck) {
  std::ostringstream os;
  os << "mtnet-checkpoint\n";
  os << "format_version = " << Checkpoint::kFormatVersion << '\n';
  os << "seed = " << ck.seed << '\n';
  os << "[config]\n" << config_to_text(ck.config);
  os << "[data]\n";
  os << "delimiter = " << static_cast<int>(ck.data.load.delimiter) << '\n'
     << "header = " << (ck.data.load.header ? 1 : 0) << '\n'
     << "forward_fill = " << (ck.data.load.forward_fill ? 1 : 0) << '\n'
     << "calendar_steps_per_day = " << ck.data.calendar_steps_per_day << '\n'
     << "train_fraction = " << format_double(ck.data.split.train_fraction) << '\n'
     << "valid_fraction = " << format_double(ck.data.split.valid_fraction) << '\n'
     << "test_fraction = " << format_double(ck.data.split.test_fraction) << '\n';
  os << "[scaler]\n";
  os << "shift = " << join_doubles(ck.scaler.shift()) << '\n';
  os << "scale = " << join_doubles(ck.scaler.scale()) << '\n';
  os << "[history]\n";
  os << "epochs = " << ck.history.epochs << '\n'
     << "best_epoch = " << ck.history.best_epoch << '\n'
     << "best_valid_loss = " << format_double(ck.history.best_valid_loss) << '\n'
     << "final_train_loss = " << format_double(ck.history.final_train_loss) << '\n'
     << "hash = " << ck.history.hash << '\n';
  os << "[params]\n";
  for (const Parameter* p : ck.params.sorted()) {
    os << "tensor " << p->name;
    const Shape& s = p->value.shape();
    for (std::size_t i = 0; i < s.rank(); ++i) os << ' ' << s[i];
    os << '\n' << join_doubles(p->value.data()) << '\n';
  }
  os << "end\n";
  return os.str();
}

Checkpoint parse_checkpoint(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "mtnet-checkpoint") {
    throw ParseError("checkpoint: missing magic line");
  }
  std::map<std::string, Section> sections;
  std::map<std::string, Tensor> tensors;
  std::string current = "";
  bool ended = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line == "end") {
      ended = true;
      break;
    }
    if (line.front() == '[' && line.back() == ']') {
      current = line.substr(1, line.size() - 2);
      continue;
    }
    if (current == "params") {
      std::istringstream ls(line);
      std::string kw, name;
      ls >> kw >> name;
      if (kw != "tensor" || name.empty()) throw ParseError("checkpoint: bad tensor header: " + line);
      std::string rest;
      std::getline(ls, rest);
      const std::vector<std::size_t> dims = parse_sizes(rest, name);
      std::string values;
      if (!std::getline(is, values)) throw ParseError("checkpoint: missing values for " + name);
      tensors[name] = Tensor(Shape(std::span<const std::size_t>(dims)),
                             parse_doubles(values, name));
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw ParseError("checkpoint: bad line: " + line);
    sections[current][line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (!ended) throw ParseError("checkpoint: truncated (no end marker)");

  const Section& top = sections[""];
  if (need_size(top, "format_version", "header") != Checkpoint::kFormatVersion) {
    throw ParseError("checkpoint: unsupported format version");
  }
  Checkpoint ck;
  ck.seed = need_size(top, "seed", "header");

  const Section& c = sections["config"];
  ck.config.memory_blocks = need_size(c, "memory_blocks", "config");
  ck.config.window = need_size(c, "window", "config");
  ck.config.horizon = need_size(c, "horizon", "config");
  ck.config.variables = need_size(c, "variables", "config");
  ck.config.targets = parse_sizes(need(c, "targets", "config"), "config.targets");
  ck.config.hidden = need_size(c, "hidden", "config");
  ck.config.filters = need_size(c, "filters", "config");
  ck.config.kernel_width = need_size(c, "kernel_width", "config");
  ck.config.ar_window = need_size(c, "ar_window", "config");
  ck.config.dropout_rate = need_double(c, "dropout", "config");
  ck.config.validate();

  const Section& d = sections["data"];
  ck.data.load.delimiter = static_cast<char>(need_size(d, "delimiter", "data"));
  ck.data.load.header = need_size(d, "header", "data") != 0;
  ck.data.load.forward_fill = need_size(d, "forward_fill", "data") != 0;
  ck.data.calendar_steps_per_day = need_size(d, "calendar_steps_per_day", "data");
  ck.data.split.train_fraction = need_double(d, "train_fraction", "data");
  ck.data.split.valid_fraction = need_double(d, "valid_fraction", "data");
  ck.data.split.test_fraction = need_double(d, "test_fraction", "data");

  const Section& s = sections["scaler"];
  ck.scaler = Scaler(parse_doubles(need(s, "shift", "scaler"), "scaler.shift"),
                     parse_doubles(need(s, "scale", "scaler"), "scaler.scale"));

  const Section& h = sections["history"];
  ck.history.epochs = need_size(h, "epochs", "history");
  ck.history.best_epoch = need_size(h, "best_epoch", "history");
  ck.history.best_valid_loss = need_double(h, "best_valid_loss", "history");
  ck.history.final_train_loss = need_double(h, "final_train_loss", "history");
  ck.history.hash = need(h, "hash", "history");

  ck.params = MTNetParams::zeros(ck.config);
  std::size_t matched = 0;
  ck.params.for_each([&](Parameter& p) {
    auto it = tensors.find(p.name);
    if (it == tensors.end()) throw ParseError("checkpoint: missing parameter " + p.name);
    if (it->second.shape() != p.value.shape()) {
      throw ParseError("checkpoint: parameter " + p.name + " has shape " +
                       it->second.shape().str() + ", config implies " + p.value.shape().str());
    }
    p.value = it->second;
    ++matched;
  });
  if (matched != tensors.size()) throw ParseError("checkpoint: unexpected extra parameters");
  return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  atomic_write(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace mtnet
