// Copyright 2026 The eigentrack Authors
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

// Command-line front end: run, sweep, preset, validate.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eigentrack/experiment.hpp"
#include "eigentrack/simd.hpp"

namespace {

using eigentrack::ExperimentConfig;

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::size_t> grid_steps;
};

void apply(const GlobalFlags& g, ExperimentConfig& c) {
  if (g.seed) c.ensemble.seed = *g.seed;
  if (g.out) c.output = *g.out;
  if (g.threads) c.threads = *g.threads;
  if (g.grid_steps) {
    c.grid.steps = *g.grid_steps;
    c.grid.max_steps = std::max(c.grid.max_steps, c.grid.steps);
  }
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("--values: '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("--values: empty list");
  return out;
}

void summarize(const eigentrack::RunReport& r) {
  for (const auto& p : r.points) {
    if (p.members == 0) continue;
    const double fe = p.fidelity_exact.empty() ? std::nan("") : p.fidelity_exact.back();
    const double ft = p.fidelity_tcl.empty() ? std::nan("") : p.fidelity_tcl.back();
    std::printf("%s  value=%-10.6g T=%-10.6g exact=%-12.8g tcl=%-12.8g %s\n", r.config.id.c_str(), p.sweep_value,
                p.total_time, fe, ft, p.diagnostics.joined().c_str());
  }
}

int execute(ExperimentConfig c, const std::string& param, const std::vector<double>& values) {
  eigentrack::validate(c);
  if (param.empty() && !c.sweep.param.empty()) {
    const std::string p = c.sweep.param;
    const std::vector<double> v = c.sweep.values;
    c.sweep = {};
    return execute(c, p, v);
  }
  if (param.empty()) {
    const auto report = eigentrack::run_experiment(c);
    eigentrack::emit(report, c.output, c.id);
    summarize(report);
    std::printf("wrote %s/%s.csv\n", c.output.c_str(), c.id.c_str());
    return 0;
  }
  c.sweep = {};
  const auto reports = eigentrack::sweep(c, param, values);
  eigentrack::emit_sweep(reports, param, values, c.output);
  for (const auto& r : reports) summarize(r);
  std::printf("wrote %zu runs and %s/index.json\n", reports.size(), c.output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eigentrack: eigenstate-tracking experiments for adiabatic-frame master equations"};
  app.set_version_flag("--version", eigentrack::version_string());
  app.require_subcommand(1);
  GlobalFlags flags;
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 1;
  std::size_t grid_steps = 0;
  auto* o_seed = app.add_option("--seed", seed, "Master seed for stochastic controls");
  auto* o_out = app.add_option("--out", out, "Output directory");
  auto* o_threads = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* o_steps = app.add_option("--grid-steps", grid_steps, "Base number of grid steps M")->check(CLI::Range(4ul, 100000000ul));

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a config (and its embedded sweep, if any)");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->fallthrough();

  std::string param, values_text;
  auto* sw = app.add_subcommand("sweep", "Sweep one scalar config field");
  sw->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sw->add_option("--param", param, "Dotted field path, e.g. bath.memory_rate")->required();
  sw->add_option("--values", values_text, "Comma-separated values")->required();
  sw->fallthrough();

  std::string preset_name;
  std::vector<std::string> overrides;
  auto* pr = app.add_subcommand("preset", "Run a stored figure preset");
  pr->add_option("name", preset_name, "fig2a | fig2b | fig3 | fig4")
      ->required()
      ->check(CLI::IsMember(eigentrack::preset_names()));
  pr->add_option("--override", overrides, "k=v field override (repeatable)");
  pr->fallthrough();

  auto* va = app.add_subcommand("validate", "Check a config without running it");
  va->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  va->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (*o_seed) flags.seed = seed;
  if (*o_out) flags.out = out;
  if (*o_threads) flags.threads = threads;
  if (*o_steps) flags.grid_steps = grid_steps;

  try {
    if (*va) {
      ExperimentConfig c = eigentrack::load_config(config_path);
      apply(flags, c);
      eigentrack::validate(c);
      std::printf("%s: ok (%zu time values, exact=%s, tcl=%s)\n", c.id.c_str(), c.time.values.size(),
                  eigentrack::resolved_exact(c).c_str(), eigentrack::resolved_tcl(c).c_str());
      return 0;
    }
    std::fprintf(stderr, "simd: %s\n", eigentrack::simd::isa_name(eigentrack::simd::active_isa()));
    if (*run) {
      ExperimentConfig c = eigentrack::load_config(config_path);
      apply(flags, c);
      return execute(c, "", {});
    }
    if (*sw) {
      ExperimentConfig c = eigentrack::load_config(config_path);
      apply(flags, c);
      return execute(c, param, parse_values(values_text));
    }
    if (*pr) {
      ExperimentConfig c = eigentrack::preset_config(preset_name);
      for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--override expects k=v, got '" + kv + "'");
        c = eigentrack::with_parameter(c, kv.substr(0, eq), kv.substr(eq + 1));
      }
      apply(flags, c);
      return execute(c, "", {});
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
