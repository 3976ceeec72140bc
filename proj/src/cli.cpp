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

#include "mtnet/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "mtnet/baselines.hpp"
#include "mtnet/errors.hpp"
#include "mtnet/evaluation.hpp"
#include "mtnet/io.hpp"

namespace mtnet {

namespace {

struct KeyInfo {
  const char* key;
  const char* help;
  bool flag;
};

const KeyInfo kKeys[] = {
    {"dataset", "Delimited text file, one row per time stamp", false},
    {"delimiter", "auto, comma or tab", false},
    {"header", "Skip one header line", true},
    {"forward_fill", "Forward-fill missing cells instead of failing", true},
    {"calendar_steps_per_day", "Append calendar features; rows per day (0 = off)", false},
    {"targets", "Comma-separated target column indices (default: all)", false},
    {"memory_blocks", "Number of memory blocks n", false},
    {"window", "Block and query length T", false},
    {"horizon", "Forecast horizon h", false},
    {"hidden", "GRU hidden size d", false},
    {"filters", "Convolution filters d_c", false},
    {"kernel_width", "Convolution width w", false},
    {"ar_window", "AR input window s_ar", false},
    {"dropout", "Dropout rate", false},
    {"learning_rate", "Adam learning rate", false},
    {"batch_size", "Mini-batch size", false},
    {"max_epochs", "Maximum training epochs", false},
    {"patience", "Early-stopping patience in epochs", false},
    {"seed", "Random seed", false},
    {"grad_clip_norm", "Gradient norm clip (<= 0 disables)", false},
    {"train_fraction", "Chronological training fraction", false},
    {"valid_fraction", "Chronological validation fraction", false},
    {"test_fraction", "Chronological test fraction", false},
    {"grid_hidden", "Grid of hidden sizes (d = d_c)", false},
    {"grid_window", "Grid of window lengths T", false},
    {"grid_lr", "Grid of learning rates", false},
    {"output_dir", "Output directory (default: $MTNET_OUTPUT_DIR or mtnet_output)", false},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  for (char c : s) {
    if (c == ',' || c == ' ') {
      if (!tok.empty()) out.push_back(tok);
      tok.clear();
    } else {
      tok += c;
    }
  }
  if (!tok.empty()) out.push_back(tok);
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long x = std::stoull(v, &used);
    if (used == v.size()) return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const std::string& t : split_list(v)) out.push_back(to_size(key, t));
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& t : split_list(v)) out.push_back(to_double(key, t));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_floating_point_v<T>) {
      os << format_double(v[i]);
    } else {
      os << v[i];
    }
  }
  return os.str();
}

std::string default_output_dir() {
  const char* env = std::getenv("MTNET_OUTPUT_DIR");
  return env && *env ? env : "mtnet_output";
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const KeyInfo& info : kKeys) k.push_back(info.key);
    return k;
  }();
  return keys;
}

RunConfig::RunConfig() : output_dir(default_output_dir()) {}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "dataset") {
    dataset = v;
  } else if (key == "delimiter") {
    if (v == "auto") {
      data.load.delimiter = 0;
    } else if (v == "comma" || v == ",") {
      data.load.delimiter = ',';
    } else if (v == "tab" || v == "\\t") {
      data.load.delimiter = '\t';
    } else {
      throw ConfigError("delimiter: expected auto, comma or tab, got '" + v + "'");
    }
  } else if (key == "header") {
    data.load.header = to_bool(key, v);
  } else if (key == "forward_fill") {
    data.load.forward_fill = to_bool(key, v);
  } else if (key == "calendar_steps_per_day") {
    data.calendar_steps_per_day = to_size(key, v);
  } else if (key == "targets") {
    targets = v == "all" ? std::vector<std::size_t>{} : to_sizes(key, v);
  } else if (key == "memory_blocks") {
    model.memory_blocks = to_size(key, v);
  } else if (key == "window") {
    model.window = to_size(key, v);
  } else if (key == "horizon") {
    model.horizon = to_size(key, v);
  } else if (key == "hidden") {
    model.hidden = to_size(key, v);
  } else if (key == "filters") {
    model.filters = to_size(key, v);
  } else if (key == "kernel_width") {
    model.kernel_width = to_size(key, v);
  } else if (key == "ar_window") {
    model.ar_window = to_size(key, v);
  } else if (key == "dropout") {
    model.dropout_rate = to_double(key, v);
  } else if (key == "learning_rate") {
    train.learning_rate = to_double(key, v);
  } else if (key == "batch_size") {
    train.batch_size = to_size(key, v);
  } else if (key == "max_epochs") {
    train.max_epochs = to_size(key, v);
  } else if (key == "patience") {
    train.patience = to_size(key, v);
  } else if (key == "seed") {
    train.seed = to_size(key, v);
  } else if (key == "grad_clip_norm") {
    train.grad_clip_norm = to_double(key, v);
  } else if (key == "train_fraction") {
    data.split.train_fraction = to_double(key, v);
  } else if (key == "valid_fraction") {
    data.split.valid_fraction = to_double(key, v);
  } else if (key == "test_fraction") {
    data.split.test_fraction = to_double(key, v);
  } else if (key == "grid_hidden") {
    grid.hidden_sizes = to_sizes(key, v);
  } else if (key == "grid_window") {
    grid.windows = to_sizes(key, v);
  } else if (key == "grid_lr") {
    grid.learning_rates = to_doubles(key, v);
  } else if (key == "output_dir") {
    output_dir = v;
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  const char* delim = data.load.delimiter == ',' ? "comma" : data.load.delimiter == '\t' ? "tab" : "auto";
  os << "dataset = " << dataset << '\n'
     << "delimiter = " << delim << '\n'
     << "header = " << (data.load.header ? "true" : "false") << '\n'
     << "forward_fill = " << (data.load.forward_fill ? "true" : "false") << '\n'
     << "calendar_steps_per_day = " << data.calendar_steps_per_day << '\n'
     << "targets = " << (targets.empty() ? "all" : join(targets)) << '\n'
     << "memory_blocks = " << model.memory_blocks << '\n'
     << "window = " << model.window << '\n'
     << "horizon = " << model.horizon << '\n'
     << "hidden = " << model.hidden << '\n'
     << "filters = " << model.filters << '\n'
     << "kernel_width = " << model.kernel_width << '\n'
     << "ar_window = " << model.ar_window << '\n'
     << "dropout = " << format_double(model.dropout_rate) << '\n'
     << "learning_rate = " << format_double(train.learning_rate) << '\n'
     << "batch_size = " << train.batch_size << '\n'
     << "max_epochs = " << train.max_epochs << '\n'
     << "patience = " << train.patience << '\n'
     << "seed = " << train.seed << '\n'
     << "grad_clip_norm = " << format_double(train.grad_clip_norm) << '\n'
     << "train_fraction = " << format_double(data.split.train_fraction) << '\n'
     << "valid_fraction = " << format_double(data.split.valid_fraction) << '\n'
     << "test_fraction = " << format_double(data.split.test_fraction) << '\n'
     << "grid_hidden = " << join(grid.hidden_sizes) << '\n'
     << "grid_window = " << join(grid.windows) << '\n'
     << "grid_lr = " << join(grid.learning_rates) << '\n'
     << "output_dir = " << output_dir << '\n';
  return os.str();
}

namespace {

struct Prepared {
  RawSeries raw;
  std::size_t observed_variables = 0;  // before calendar features
  Split split;
  Scaler scaler;
  std::shared_ptr<const Tensor> scaled;
};

Prepared prepare(const std::string& path, const DataOptions& opts, const Scaler* scaler) {
  if (path.empty()) throw UsageError("a dataset path is required (--dataset)");
  Prepared p;
  p.raw = load_matrix(path, opts.load);
  p.observed_variables = p.raw.variables();
  if (opts.calendar_steps_per_day > 0) append_calendar_features(p.raw, opts.calendar_steps_per_day);
  p.split = chronological_split(p.raw.length(), opts.split);
  if (scaler != nullptr) {
    if (scaler->variables() != p.raw.variables()) {
      throw DimensionError("dataset has " + std::to_string(p.raw.variables()) +
                           " variables, checkpoint expects " +
                           std::to_string(scaler->variables()));
    }
    p.scaler = *scaler;
  } else {
    p.scaler = Scaler::fit(p.raw.values, p.split.train);
  }
  p.scaled = std::make_shared<const Tensor>(p.scaler.apply(p.raw.values));
  return p;
}

MTNetConfig resolve_model(const RunConfig& rc, const Prepared& d) {
  MTNetConfig cfg = rc.model;
  cfg.variables = d.raw.variables();
  cfg.targets = rc.targets;
  if (cfg.targets.empty()) {
    for (std::size_t v = 0; v < d.observed_variables; ++v) cfg.targets.push_back(v);
  }
  cfg.validate();
  return cfg;
}

std::string path_in(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : dir + "/" + name;
}

void write_report(const EvalReport& report, const std::string& dir, const std::string& stem) {
  atomic_write(path_in(dir, stem + ".csv"), report_to_csv(report));
  atomic_write(path_in(dir, stem + ".json"), report_to_json(report));
}

/// Checkpoint, history, chosen config and test-set report for a trained model.
void write_training_outputs(const RunConfig& rc, const MTNetModel& model, const Prepared& d,
                            const TrainHistory& history, std::ostream& out) {
  Checkpoint ck;
  ck.config = model.config;
  ck.params = model.params;
  ck.scaler = d.scaler;
  ck.data = rc.data;
  ck.history = digest(history);
  ck.seed = rc.train.seed;
  const std::string& dir = rc.output_dir;
  save_checkpoint(ck, path_in(dir, "checkpoint.txt"));
  atomic_write(path_in(dir, "history.csv"), history_to_csv(history));
  RunConfig chosen = rc;
  chosen.model = model.config;
  chosen.targets = model.config.targets;
  atomic_write(path_in(dir, "run_config.txt"), chosen.to_text());

  const SampleSet test = make_samples(d.scaled, model.config, d.split.test);
  out << "trained " << history.epochs.size() << " epochs, best epoch " << history.best_epoch
      << ", validation L1 " << format_double(history.best_valid_loss) << '\n';
  if (test.empty()) {
    out << "test partition too short for a full history; no test report written\n";
    return;
  }
  EvalReport report = evaluate_model(model, test, d.scaler, model.config.horizon);
  report.traces_path = path_in(dir, "attention.csv");
  write_report(report, dir, "metrics");
  export_traces(report.traces, report.traces_path);
  out << report_to_csv(report);
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  rc.train.validate();
  const Prepared d = prepare(rc.dataset, rc.data, nullptr);
  const MTNetConfig cfg = resolve_model(rc, d);
  const SampleSet train = make_samples(d.scaled, cfg, d.split.train);
  const SampleSet valid = make_samples(d.scaled, cfg, d.split.valid);
  if (train.empty() || valid.empty()) {
    throw Error("dataset too short: training and validation partitions need at least " +
                std::to_string(first_target_time(cfg) + 1) + " steps of history");
  }
  MTNetModel model = MTNetModel::create(cfg, rc.train.seed);
  FitResult fr = fit(model, train, valid, rc.train);
  write_training_outputs(rc, model, d, fr.history, out);
  return kExitOk;
}

int cmd_evaluate(const RunConfig& rc, const std::string& checkpoint,
                 std::optional<std::size_t> horizon, bool traces, std::ostream& out) {
  if (checkpoint.empty()) throw UsageError("--checkpoint is required");
  const Checkpoint ck = load_checkpoint(checkpoint);
  const Prepared d = prepare(rc.dataset, ck.data, &ck.scaler);
  const MTNetModel model{ck.config, ck.params};
  const SampleSet test = make_samples(d.scaled, ck.config, d.split.test);
  if (test.empty()) throw Error("test partition has no sample with a full history");
  EvalReport report =
      evaluate_model(model, test, d.scaler, horizon.value_or(ck.config.horizon));
  if (traces) {
    report.traces_path = path_in(rc.output_dir, "eval_attention.csv");
    export_traces(report.traces, report.traces_path);
  }
  write_report(report, rc.output_dir, "eval_metrics");
  out << report_to_csv(report);
  return kExitOk;
}

int cmd_predict(const RunConfig& rc, const std::string& checkpoint, std::ostream& out) {
  if (checkpoint.empty()) throw UsageError("--checkpoint is required");
  const Checkpoint ck = load_checkpoint(checkpoint);
  const Prepared d = prepare(rc.dataset, ck.data, &ck.scaler);
  const MTNetModel model{ck.config, ck.params};
  const WindowSample s = make_forecast_sample(*d.scaled, ck.config);
  const Prediction p = predict(model, s);
  const Tensor y = d.scaler.invert_targets(p.value, ck.config.targets);
  std::ostringstream os;
  os << "target_time";
  for (std::size_t v : ck.config.targets) os << ',' << d.raw.variable_names.at(v);
  os << '\n' << s.target_time;
  for (double v : y.data()) os << ',' << format_double(v);
  os << '\n';
  atomic_write(path_in(rc.output_dir, "forecast.csv"), os.str());
  out << os.str();
  return kExitOk;
}

int cmd_export_attention(const RunConfig& rc, const std::string& checkpoint,
                         std::optional<std::size_t> time, const std::string& range,
                         const std::string& output, std::ostream& out) {
  if (checkpoint.empty()) throw UsageError("--checkpoint is required");
  if (time.has_value() == !range.empty()) {
    throw UsageError("give exactly one of --time or --range");
  }
  std::size_t first = 0, last = 0;
  if (time) {
    first = *time;
    last = *time + 1;
  } else {
    const auto colon = range.find(':');
    if (colon == std::string::npos) throw UsageError("--range expects start:end");
    first = to_size("range", range.substr(0, colon));
    last = to_size("range", range.substr(colon + 1));
    if (last <= first) throw UsageError("--range end must exceed start");
  }
  const Checkpoint ck = load_checkpoint(checkpoint);
  const Prepared d = prepare(rc.dataset, ck.data, &ck.scaler);
  const TimeRange test = d.split.test;
  const std::size_t lo = std::max(test.begin, first_target_time(ck.config));
  if (first < lo || last > test.end) {
    throw ConfigError("time index outside the test range [" + std::to_string(lo) + ", " +
                      std::to_string(test.end) + ")");
  }
  std::vector<std::size_t> times;
  for (std::size_t t = first; t < last; ++t) times.push_back(t);
  const SampleSet samples(d.scaled, ck.config, std::move(times));
  const MTNetModel model{ck.config, ck.params};
  std::vector<AttentionTrace> traces;
  for (std::size_t i = 0; i < samples.size(); ++i) traces.push_back(predict(model, samples[i]).trace);
  const std::string path = output.empty() ? path_in(rc.output_dir, "attention_export.csv") : output;
  export_traces(traces, path);
  out << "wrote " << traces.size() << " attention records to " << path << '\n';
  return kExitOk;
}

int cmd_grid_search(const RunConfig& rc, std::ostream& out) {
  rc.train.validate();
  const Prepared d = prepare(rc.dataset, rc.data, nullptr);
  const MTNetConfig base = resolve_model(rc, d);
  GridSpec grid = rc.grid;
  if (grid.hidden_sizes.empty() && grid.windows.empty() && grid.learning_rates.empty()) {
    grid = GridSpec::defaults();
  }
  GridResult gr = grid_search(Dataset{d.scaled, d.split}, base, grid, rc.train);
  std::ostringstream os;
  os << "index,hidden,window,learning_rate,valid_loss,status\n";
  for (const GridRow& r : gr.rows) {
    os << r.index << ',' << r.config.hidden << ',' << r.config.window << ','
       << format_double(r.train.learning_rate) << ','
       << (r.ok ? format_double(r.valid_loss) : std::string("nan")) << ','
       << (r.ok ? std::string("ok") : "error: " + r.error) << '\n';
  }
  atomic_write(path_in(rc.output_dir, "grid.csv"), os.str());
  out << os.str();
  RunConfig best = rc;
  best.train = gr.rows[gr.best].train;
  write_training_outputs(best, gr.best_model, d, gr.best_history, out);
  return kExitOk;
}

int cmd_baseline(const RunConfig& rc, const std::string& method,
                 const std::vector<std::size_t>& windows_opt,
                 const std::vector<double>& lambdas_opt, std::ostream& out) {
  if (method != "ar" && method != "ridge") {
    throw UsageError("unknown baseline method '" + method + "'; supported methods: ar, ridge");
  }
  const Prepared d = prepare(rc.dataset, rc.data, nullptr);
  const MTNetConfig cfg = resolve_model(rc, d);
  const std::vector<std::size_t> windows = windows_opt.empty() ? default_ar_windows() : windows_opt;
  std::vector<double> lambdas;
  if (method == "ar") {
    if (!lambdas_opt.empty()) throw UsageError("--lambdas applies to the ridge method only");
    lambdas = {0.0};
  } else {
    lambdas = lambdas_opt.empty() ? default_ridge_lambdas() : lambdas_opt;
  }
  const LinearSelection sel = select_linear_ar(*d.scaled, d.split, d.scaler, windows, lambdas,
                                               cfg.horizon, cfg.targets);
  std::ostringstream grid;
  grid << "window,lambda,valid_rrse,status\n";
  for (const LinearGridRow& r : sel.rows) {
    grid << r.window << ',' << format_double(r.lambda) << ','
         << (r.ok ? format_double(r.valid_rrse) : std::string("nan")) << ','
         << (r.ok ? "ok" : "error") << '\n';
  }
  atomic_write(path_in(rc.output_dir, "baseline_" + method + "_grid.csv"), grid.str());
  const EvalReport report = evaluate_linear(sel.model, *d.scaled, d.split.test, d.scaler);
  write_report(report, rc.output_dir, "baseline_" + method + "_metrics");
  out << "selected window " << sel.model.window << ", lambda " << format_double(sel.model.lambda)
      << '\n'
      << report_to_csv(report);
  return kExitOk;
}

int cmd_synth(const RunConfig& rc, SynthOptions opts, const std::string& output,
              std::ostream& out) {
  if (output.empty()) throw UsageError("--output is required");
  opts.seed = rc.train.seed;
  atomic_write(output, series_to_csv(synthesize(opts)));
  out << "wrote " << opts.length << " rows x " << opts.variables << " variables to " << output
      << '\n';
  return kExitOk;
}

std::string dashed(const std::string& key) {
  std::string s = "--" + key;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Memory time-series network forecasting toolkit", "mtnet"};
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const KeyInfo& k : kKeys) {
    options[k.key] = k.flag ? app.add_flag(dashed(k.key), k.help)
                            : app.add_option(dashed(k.key), values[k.key], k.help);
  }
  std::string config_path;
  app.add_option("--config", config_path, "Flat 'key = value' config file; flags override it");

  auto* train = app.add_subcommand("train", "Train a model and write checkpoint, history, report");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on the test partition");
  auto* predict_cmd = app.add_subcommand("predict", "Forecast h steps past the end of the data");
  auto* export_cmd = app.add_subcommand("export-attention", "Export memory attention weights");
  auto* grid = app.add_subcommand("grid-search", "Grid search on the validation partition");
  auto* baseline = app.add_subcommand("baseline", "Fit and evaluate a linear baseline");
  auto* synth = app.add_subcommand("synth", "Write a synthetic sum-of-sinusoids dataset");

  std::string checkpoint;
  for (auto* sub : {evaluate, predict_cmd, export_cmd}) {
    sub->add_option("--checkpoint", checkpoint, "Checkpoint written by train");
  }
  bool write_traces = false;
  evaluate->add_flag("--traces", write_traces, "Also write attention traces");
  std::optional<std::size_t> time;
  std::string range, output;
  export_cmd->add_option("--time", time, "Absolute target time index");
  export_cmd->add_option("--range", range, "Half-open target range start:end");
  export_cmd->add_option("--output", output, "Trace file path");
  std::string method;
  std::string windows_arg, lambdas_arg;
  baseline->add_option("--method", method, "ar or ridge")->required();
  baseline->add_option("--windows", windows_arg, "Window grid (default 1,2,4,...,512)");
  baseline->add_option("--lambdas", lambdas_arg, "Ridge penalty grid (default 2^-10..2^10)");
  SynthOptions synth_opts;
  synth->add_option("--length", synth_opts.length, "Number of rows");
  synth->add_option("--variables", synth_opts.variables, "Number of columns");
  synth->add_option("--period", synth_opts.period, "Period in steps");
  synth->add_option("--harmonics", synth_opts.harmonics, "Number of harmonics");
  synth->add_option("--noise", synth_opts.noise, "Gaussian noise level");
  synth->add_option("--drift", synth_opts.drift, "Relative amplitude growth per period");
  synth->add_option("--output", output, "Output CSV path");
  for (auto* sub : {train, evaluate, predict_cmd, export_cmd, grid, baseline, synth}) {
    sub->fallthrough();
  }

  std::vector<std::string> storage = args;
  if (storage.empty()) storage.push_back("mtnet");
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    RunConfig rc;
    if (!config_path.empty()) rc.load_file(config_path);
    for (const KeyInfo& k : kKeys) {
      if (options[k.key]->count() > 0) rc.set(k.key, k.flag ? "true" : values[k.key]);
    }
    std::optional<std::size_t> horizon;
    if (options["horizon"]->count() > 0) horizon = rc.model.horizon;

    if (*train) return cmd_train(rc, out);
    if (*evaluate) return cmd_evaluate(rc, checkpoint, horizon, write_traces, out);
    if (*predict_cmd) return cmd_predict(rc, checkpoint, out);
    if (*export_cmd) return cmd_export_attention(rc, checkpoint, time, range, output, out);
    if (*grid) return cmd_grid_search(rc, out);
    if (*baseline) {
      return cmd_baseline(rc, method, to_sizes("windows", windows_arg),
                          to_doubles("lambdas", lambdas_arg), out);
    }
    if (*synth) return cmd_synth(rc, synth_opts, output, out);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mtnet
