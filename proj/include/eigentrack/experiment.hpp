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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eigentrack/densemath.hpp"

namespace eigentrack {

struct ModelConfig {
  std::string name = "open_qubit";  // open_qubit | rotating_qubit | two_qubit
  double rotation_fraction = 1.0;   // open_qubit; 0 freezes H
  double rotation_rate = 5.0;       // rotating_qubit Omega
  double z_field = 5.0;             // rotating_qubit omega
  double noise_field = 0.0;         // two_qubit B
  bool operator==(const ModelConfig&) const = default;
};

struct BathConfig {
  double coupling = 1.0;     // Gamma; 0 disables the bath
  double memory_rate = 0.5;  // gamma
  bool operator==(const BathConfig&) const = default;
};

struct ControlConfig {
  std::string variant = "none";  // none | rect | chaotic | impulse
  double baseline = 1.0;
  double area = 0.0;
  double duration = 0.0;
  double period = 0.0;
  double duty_ratio = 0.0;  // when positive, duration = duty_ratio * period
  double mu = 3.9;
  double seed_value = 0.5;
  int k_min = 6;
  int k_max = 16;
  double mean_amplitude = 1.0;
  bool operator==(const ControlConfig&) const = default;
};

struct TimeConfig {
  std::vector<double> values{1.0};  // total times (series horizon for closed models)
  std::string unit = "absolute";    // absolute | coupling (values are Gamma T)
  std::string record = "final";     // final | series
  std::size_t stride = 1;           // series decimation
  bool operator==(const TimeConfig&) const = default;
};

struct GridConfig {
  std::size_t steps = 2000;
  std::size_t steps_per_period = 0;  // raise steps to resolve the control period
  std::size_t max_steps = 400000;
  bool operator==(const GridConfig&) const = default;
};

struct EnsembleConfig {
  std::size_t size = 1;
  std::uint64_t seed = 0;
  bool operator==(const EnsembleConfig&) const = default;
};

struct SolverConfig {
  std::string exact = "auto";  // auto | master_equation | oracle | none
  std::string tcl = "auto";    // auto | constant_gap | kernels | exact_tcl | second_order | none
  bool include_f = true;
  bool dressed = false;
  int substeps = 2;
  bool operator==(const SolverConfig&) const = default;
};

struct SweepConfig {
  std::string param;  // empty when the config is a single run
  std::vector<double> values;
  bool operator==(const SweepConfig&) const = default;
};

struct ExperimentConfig {
  std::string id = "experiment";
  ModelConfig model;
  BathConfig bath;
  ControlConfig control;
  TimeConfig time;
  GridConfig grid;
  EnsembleConfig ensemble;
  SolverConfig solver;
  SweepConfig sweep;
  std::string output = "out";
  unsigned threads = 1;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Unknown keys and ill-typed values raise std::invalid_argument naming the key.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Semantic checks; throws std::invalid_argument with the offending field.
void validate(const ExperimentConfig& config);

/// Sets a scalar field addressed by a dotted path, e.g. "bath.memory_rate".
ExperimentConfig with_parameter(const ExperimentConfig& config, const std::string& path,
                                const std::string& value);

std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

struct PointResult {
  double sweep_value = 0.0;
  double total_time = 0.0;
  std::size_t members = 0;
  std::vector<double> time;
  std::vector<double> fidelity_exact;  // ensemble means
  std::vector<double> fidelity_tcl;
  std::vector<double> stderr_exact;
  std::vector<double> stderr_tcl;
  double kappa_integral = 0.0;  // ensemble mean, open model only
  double average_gap = 0.0;     // ensemble mean of (1/T) integral of J
  double adiabatic_estimate = 0.0;
  Diagnostics diagnostics;
};

struct RunReport {
  ExperimentConfig config;
  std::string version;
  std::vector<PointResult> points;
};

/// Resolved solver names after "auto".
std::string resolved_exact(const ExperimentConfig& config);
std::string resolved_tcl(const ExperimentConfig& config);

RunReport run_experiment(const ExperimentConfig& config);

/// One report per value, in value order; runs concurrently over config.threads.
std::vector<RunReport> sweep(const ExperimentConfig& config, const std::string& path,
                             const std::vector<double>& values);

std::string report_csv(const RunReport& report);
std::string report_json(const RunReport& report);

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json.
void emit(const RunReport& report, const std::filesystem::path& dir, const std::string& stem);
/// Writes each report plus index.json listing them.
void emit_sweep(const std::vector<RunReport>& reports, const std::string& path,
                const std::vector<double>& values, const std::filesystem::path& dir);

std::string version_string();

}  // namespace eigentrack
