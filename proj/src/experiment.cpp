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

#include "eigentrack/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "eigentrack/bath.hpp"
#include "eigentrack/controls.hpp"
#include "eigentrack/frame.hpp"
#include "eigentrack/models.hpp"
#include "eigentrack/partition.hpp"
#include "eigentrack/tcl.hpp"

#ifndef EIGENTRACK_VERSION
#define EIGENTRACK_VERSION "0.0.0"
#endif

namespace eigentrack {

using json = nlohmann::json;

std::string version_string() { return EIGENTRACK_VERSION; }

// ---------------------------------------------------------------------------
// Config serialization

namespace {

class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw std::invalid_argument(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    const std::string name = where_.empty() ? key : where_ + "." + key;
    read(*it, name, out);
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw std::invalid_argument("unknown config key '" + (where_.empty() ? it.key() : where_ + "." + it.key()) +
                                    "'");
      }
    }
  }

 private:
  static void read(const json& v, const std::string& name, double& out) {
    if (!v.is_number()) throw std::invalid_argument(name + ": expected a number");
    out = v.get<double>();
  }
  static void read(const json& v, const std::string& name, int& out) {
    if (!v.is_number_integer()) throw std::invalid_argument(name + ": expected an integer");
    out = v.get<int>();
  }
  static void read(const json& v, const std::string& name, unsigned& out) {
    if (!v.is_number_unsigned()) throw std::invalid_argument(name + ": expected a non-negative integer");
    out = v.get<unsigned>();
  }
  static void read(const json& v, const std::string& name, unsigned long& out) {
    if (!v.is_number_unsigned()) throw std::invalid_argument(name + ": expected a non-negative integer");
    out = v.get<unsigned long>();
  }
  static void read(const json& v, const std::string& name, unsigned long long& out) {
    if (!v.is_number_unsigned()) throw std::invalid_argument(name + ": expected a non-negative integer");
    out = v.get<unsigned long long>();
  }
  static void read(const json& v, const std::string& name, bool& out) {
    if (!v.is_boolean()) throw std::invalid_argument(name + ": expected true or false");
    out = v.get<bool>();
  }
  static void read(const json& v, const std::string& name, std::string& out) {
    if (!v.is_string()) throw std::invalid_argument(name + ": expected a string");
    out = v.get<std::string>();
  }
  static void read(const json& v, const std::string& name, std::vector<double>& out) {
    if (!v.is_array()) throw std::invalid_argument(name + ": expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw std::invalid_argument(name + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json to_tree(const ExperimentConfig& c) {
  json j;
  j["id"] = c.id;
  j["model"] = {{"name", c.model.name},
                {"rotation_fraction", c.model.rotation_fraction},
                {"rotation_rate", c.model.rotation_rate},
                {"z_field", c.model.z_field},
                {"noise_field", c.model.noise_field}};
  j["bath"] = {{"coupling", c.bath.coupling}, {"memory_rate", c.bath.memory_rate}};
  j["control"] = {{"variant", c.control.variant},   {"baseline", c.control.baseline},
                  {"area", c.control.area},         {"duration", c.control.duration},
                  {"period", c.control.period},     {"duty_ratio", c.control.duty_ratio},
                  {"mu", c.control.mu},             {"seed_value", c.control.seed_value},
                  {"k_min", c.control.k_min},       {"k_max", c.control.k_max},
                  {"mean_amplitude", c.control.mean_amplitude}};
  j["time"] = {{"values", c.time.values}, {"unit", c.time.unit}, {"record", c.time.record}, {"stride", c.time.stride}};
  j["grid"] = {{"steps", c.grid.steps}, {"steps_per_period", c.grid.steps_per_period}, {"max_steps", c.grid.max_steps}};
  j["ensemble"] = {{"size", c.ensemble.size}, {"seed", c.ensemble.seed}};
  j["solver"] = {{"exact", c.solver.exact},
                 {"tcl", c.solver.tcl},
                 {"include_f", c.solver.include_f},
                 {"dressed", c.solver.dressed},
                 {"substeps", c.solver.substeps}};
  j["sweep"] = {{"param", c.sweep.param}, {"values", c.sweep.values}};
  j["output"] = c.output;
  j["threads"] = c.threads;
  return j;
}

ExperimentConfig from_tree(const json& j) {
  ExperimentConfig c;
  Fields top(j, "");
  top.get("id", c.id);
  top.get("output", c.output);
  top.get("threads", c.threads);
  if (const json* m = top.child("model")) {
    Fields f(*m, "model");
    f.get("name", c.model.name);
    f.get("rotation_fraction", c.model.rotation_fraction);
    f.get("rotation_rate", c.model.rotation_rate);
    f.get("z_field", c.model.z_field);
    f.get("noise_field", c.model.noise_field);
    f.finish();
  }
  if (const json* b = top.child("bath")) {
    Fields f(*b, "bath");
    f.get("coupling", c.bath.coupling);
    f.get("memory_rate", c.bath.memory_rate);
    f.finish();
  }
  if (const json* k = top.child("control")) {
    Fields f(*k, "control");
    f.get("variant", c.control.variant);
    f.get("baseline", c.control.baseline);
    f.get("area", c.control.area);
    f.get("duration", c.control.duration);
    f.get("period", c.control.period);
    f.get("duty_ratio", c.control.duty_ratio);
    f.get("mu", c.control.mu);
    f.get("seed_value", c.control.seed_value);
    f.get("k_min", c.control.k_min);
    f.get("k_max", c.control.k_max);
    f.get("mean_amplitude", c.control.mean_amplitude);
    f.finish();
  }
  if (const json* t = top.child("time")) {
    Fields f(*t, "time");
    f.get("values", c.time.values);
    f.get("unit", c.time.unit);
    f.get("record", c.time.record);
    f.get("stride", c.time.stride);
    f.finish();
  }
  if (const json* g = top.child("grid")) {
    Fields f(*g, "grid");
    f.get("steps", c.grid.steps);
    f.get("steps_per_period", c.grid.steps_per_period);
    f.get("max_steps", c.grid.max_steps);
    f.finish();
  }
  if (const json* e = top.child("ensemble")) {
    Fields f(*e, "ensemble");
    f.get("size", c.ensemble.size);
    f.get("seed", c.ensemble.seed);
    f.finish();
  }
  if (const json* s = top.child("solver")) {
    Fields f(*s, "solver");
    f.get("exact", c.solver.exact);
    f.get("tcl", c.solver.tcl);
    f.get("include_f", c.solver.include_f);
    f.get("dressed", c.solver.dressed);
    f.get("substeps", c.solver.substeps);
    f.finish();
  }
  if (const json* s = top.child("sweep")) {
    Fields f(*s, "sweep");
    f.get("param", c.sweep.param);
    f.get("values", c.sweep.values);
    f.finish();
  }
  top.finish();
  return c;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
}

bool is_open(const ExperimentConfig& c) { return c.model.name == "open_qubit"; }

template <class T>
bool one_of(const T& v, std::initializer_list<T> options) {
  return std::find(options.begin(), options.end(), v) != options.end();
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) { return from_tree(parse_text(text)); }

std::string config_to_json(const ExperimentConfig& config) { return to_tree(config).dump(2) + "\n"; }

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = parse_text(ss.str());
  // A run sidecar carries the config it was produced from.
  if (j.is_object() && j.contains("config") && j.contains("points")) return from_tree(j.at("config"));
  return from_tree(j);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

ControlSignal make_signal(const ControlConfig& c, std::uint64_t seed, std::uint64_t realization) {
  ControlSignal s;
  s.baseline = c.baseline;
  const double duration = c.duty_ratio > 0.0 ? c.duty_ratio * c.period : c.duration;
  if (c.variant == "none") {
    s.variant = NoControl{};
  } else if (c.variant == "rect") {
    s.variant = RectTrain{c.area, duration, c.period};
  } else if (c.variant == "chaotic") {
    s.variant = ChaoticTrain{c.area, duration, c.period, c.mu, c.seed_value};
  } else if (c.variant == "impulse") {
    s.variant = ImpulseNoise{duration, c.period, c.k_min, c.k_max, c.mean_amplitude, seed, realization};
  } else {
    throw std::invalid_argument("control.variant: unknown variant '" + c.variant + "'");
  }
  return s;
}

double total_time_of(const ExperimentConfig& c, double value) {
  return c.time.unit == "coupling" ? value / c.bath.coupling : value;
}

}  // namespace

std::string resolved_exact(const ExperimentConfig& c) {
  if (c.solver.exact != "auto") return c.solver.exact;
  return is_open(c) ? "master_equation" : "oracle";
}

std::string resolved_tcl(const ExperimentConfig& c) {
  if (c.solver.tcl != "auto") return c.solver.tcl;
  return is_open(c) ? "kernels" : "exact_tcl";
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (c.id.empty()) fail("id: must not be empty");
  if (!one_of<std::string>(c.model.name, {"open_qubit", "rotating_qubit", "two_qubit"})) {
    fail("model.name: unknown model '" + c.model.name + "'");
  }
  const bool open = is_open(c);
  if (open) {
    if (!(c.bath.coupling >= 0.0) || !std::isfinite(c.bath.coupling)) fail("bath.coupling: must be >= 0");
    if (!(c.bath.memory_rate > 0.0) || !std::isfinite(c.bath.memory_rate)) fail("bath.memory_rate: must be > 0");
  }
  if (!std::isfinite(c.model.rotation_fraction)) fail("model.rotation_fraction: must be finite");
  if (!one_of<std::string>(c.time.unit, {"absolute", "coupling"})) fail("time.unit: absolute or coupling");
  if (c.time.unit == "coupling" && !(open && c.bath.coupling > 0.0)) {
    fail("time.unit: coupling units need an open model with bath.coupling > 0");
  }
  if (!one_of<std::string>(c.time.record, {"final", "series"})) fail("time.record: final or series");
  if (c.time.stride == 0) fail("time.stride: must be >= 1");
  if (c.time.values.empty()) fail("time.values: must not be empty");
  for (double v : c.time.values) {
    if (!(v > 0.0) || !std::isfinite(v)) fail("time.values: entries must be positive");
  }
  if (c.grid.steps < 4) fail("grid.steps: must be >= 4");
  if (c.grid.max_steps < c.grid.steps) fail("grid.max_steps: must be >= grid.steps");
  if (c.solver.substeps < 1) fail("solver.substeps: must be >= 1");
  if (c.control.duty_ratio < 0.0 || c.control.duty_ratio > 1.0) fail("control.duty_ratio: must lie in [0, 1]");
  if (c.control.duty_ratio > 0.0 && c.control.duration != 0.0) {
    fail("control.duty_ratio: set either duration or duty_ratio, not both");
  }
  const std::string ex = resolved_exact(c), tc = resolved_tcl(c);
  if (open) {
    if (!one_of<std::string>(ex, {"master_equation", "oracle", "none"})) fail("solver.exact: '" + ex + "' not available for open_qubit");
    if (!one_of<std::string>(tc, {"constant_gap", "kernels", "exact_tcl", "none"})) fail("solver.tcl: '" + tc + "' not available for open_qubit");
    if (tc == "constant_gap" && c.model.rotation_fraction != 1.0) {
      fail("solver.tcl: constant_gap kernels assume model.rotation_fraction = 1");
    }
  } else {
    if (!one_of<std::string>(ex, {"oracle", "none"})) fail("solver.exact: '" + ex + "' not available for " + c.model.name);
    if (!one_of<std::string>(tc, {"exact_tcl", "second_order", "none"})) fail("solver.tcl: '" + tc + "' not available for " + c.model.name);
  }
  if (c.solver.dressed && tc != "kernels") fail("solver.dressed: only applies to tcl = kernels");
  for (double v : c.time.values) {
    try {
      const Control probe(make_signal(c.control, c.ensemble.seed, 0), total_time_of(c, v));
      (void)probe;
    } catch (const std::invalid_argument& e) {
      fail(std::string("control: ") + e.what());
    }
  }
  if (!c.sweep.param.empty()) {
    if (c.sweep.values.empty()) fail("sweep.values: must not be empty when sweep.param is set");
    for (double v : c.sweep.values) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      ExperimentConfig probe = with_parameter(c, c.sweep.param, buf);
      probe.sweep = {};
      validate(probe);
    }
  }
}

ExperimentConfig with_parameter(const ExperimentConfig& config, const std::string& path, const std::string& value) {
  json j = to_tree(config);
  json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw std::invalid_argument("parameter path is empty");
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (!node->is_object() || !node->contains(parts[k])) {
      throw std::invalid_argument("unknown parameter path '" + path + "'");
    }
    node = &(*node)[parts[k]];
  }
  if (node->is_object() || node->is_null()) throw std::invalid_argument("parameter path '" + path + "' is not a scalar field");
  auto number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) throw std::invalid_argument("'" + text + "' is not a number for " + path);
    return v;
  };
  if (node->is_string()) {
    *node = value;
  } else if (node->is_boolean()) {
    if (value == "true") *node = true;
    else if (value == "false") *node = false;
    else throw std::invalid_argument("'" + value + "' is not a boolean for " + path);
  } else if (node->is_number_unsigned() || node->is_number_integer()) {
    const double v = number(value);
    if (v != std::floor(v)) throw std::invalid_argument("'" + value + "' is not an integer for " + path);
    if (node->is_number_unsigned()) {
      if (v < 0) throw std::invalid_argument("'" + value + "' must be non-negative for " + path);
      *node = static_cast<std::uint64_t>(v);
    } else {
      *node = static_cast<std::int64_t>(v);
    }
  } else if (node->is_number()) {
    *node = number(value);
  } else if (node->is_array()) {
    json arr = json::array();
    std::stringstream vs(value);
    std::string item;
    while (std::getline(vs, item, ',')) arr.push_back(number(item));
    *node = arr;
  }
  return from_tree(j);
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() { return {"fig2a", "fig2b", "fig3", "fig4"}; }

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  c.id = name;
  c.output = "out/" + name;
  if (name == "fig2a" || name == "fig2b") {
    c.model.name = "open_qubit";
    c.bath = {1.0, 0.5};
    c.control.baseline = 1.0;
    c.control.period = 0.02;
    c.time.unit = "coupling";
    c.time.record = "final";
    c.grid.steps = 2000;
    c.grid.steps_per_period = 16;
    c.solver.exact = "master_equation";
    c.solver.tcl = "constant_gap";
    c.solver.include_f = false;
    if (name == "fig2a") {
      c.control.variant = "rect";
      c.control.area = 1.0;
      c.control.duty_ratio = 0.4;
      c.time.values = {0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
      c.sweep = {"bath.memory_rate", {0.2, 0.5, 1.0, 2.0}};
    } else {
      c.control.variant = "impulse";
      c.control.duty_ratio = 0.4;
      c.control.k_min = 6;
      c.control.k_max = 16;
      c.control.mean_amplitude = 1.0;
      c.time.values = {1, 2, 4, 7, 10, 15, 20};
      c.grid.steps_per_period = 8;
      c.ensemble = {200, 1};
      c.sweep = {"control.duty_ratio", {0.2, 0.4, 0.6, 0.8}};
    }
    return c;
  }
  if (name == "fig3" || name == "fig4") {
    c.model.name = name == "fig3" ? "rotating_qubit" : "two_qubit";
    c.model.rotation_rate = 5.0;
    c.model.z_field = 5.0;
    c.bath = {0.0, 0.5};
    c.control.variant = "rect";
    c.control.baseline = 1.0;
    c.control.area = 0.01;
    c.control.duty_ratio = 0.5;
    c.control.period = 0.01;
    c.time.values = {name == "fig3" ? 10.0 : 1.0};
    c.time.record = "series";
    c.time.stride = name == "fig3" ? 8 : 4;
    c.grid.steps = 4000;
    c.grid.steps_per_period = 8;
    c.solver.exact = "oracle";
    c.solver.tcl = "exact_tcl";
    c.sweep = {"control.period", {0.01, 0.005, 0.0025, 0.00125}};
    return c;
  }
  throw std::invalid_argument("unknown preset '" + name + "' (fig2a, fig2b, fig3, fig4)");
}

// ---------------------------------------------------------------------------
// Execution

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MemberResult {
  std::vector<double> time;
  std::vector<double> exact;
  std::vector<double> tcl;
  double kappa_integral = 0.0;
  double average_gap = 0.0;
  double adiabatic = 0.0;
  Diagnostics diagnostics;
  std::string error;
};

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::size_t grid_steps(const ExperimentConfig& c, double total, Diagnostics& diag) {
  std::size_t m = c.grid.steps;
  if (c.grid.steps_per_period > 0 && c.control.variant != "none" && c.control.period > 0.0) {
    const double periods = std::ceil(total / c.control.period - 1e-9);
    const double want = periods * static_cast<double>(c.grid.steps_per_period);
    if (want > static_cast<double>(c.grid.max_steps)) {
      diag.flag("grid_capped", "steps_per_period capped by grid.max_steps");
      m = std::max(m, c.grid.max_steps);
    } else {
      m = std::max(m, static_cast<std::size_t>(want));
    }
  }
  return m;
}

std::vector<std::size_t> recorded_indices(const ExperimentConfig& c, std::size_t n) {
  std::vector<std::size_t> idx;
  if (c.time.record == "final") return {n - 1};
  for (std::size_t i = 0; i < n; i += c.time.stride) idx.push_back(i);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

std::vector<double> sqrt_abs(const std::vector<cplx>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  for (std::size_t i : idx) out.push_back(std::sqrt(std::abs(v[i])));
  return out;
}

std::vector<double> modulus(const std::vector<cplx>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  for (std::size_t i : idx) out.push_back(std::abs(v[i]));
  return out;
}

std::vector<double> event_list(const Control& control) {
  auto ev = control.events();
  return {ev.begin(), ev.end()};
}

MemberResult run_open_member(const ExperimentConfig& c, double total, std::uint64_t member) {
  MemberResult r;
  auto control = std::make_shared<const Control>(make_signal(c.control, c.ensemble.seed, member), total);
  const OpenQubitModel model(control, total, c.model.rotation_fraction);
  const TimeGrid grid(0.0, total, grid_steps(c, total, r.diagnostics));
  const auto idx = recorded_indices(c, grid.size());
  for (std::size_t i : idx) r.time.push_back(grid.at(i));
  const BathSpec bath{c.bath.coupling, c.bath.memory_rate};
  const DecayFunctions decay = solve_c_plus(bath, control, grid);
  r.diagnostics.merge(decay.diagnostics);
  r.kappa_integral = decay.truncated() ? kNaN : decay.kappa_integral_at_sample(grid.size() - 1);
  r.average_gap = control->average_J(total);
  const SpectralFrame frame = open_qubit_frame(model, grid);
  const AdiabaticEstimate est = adiabatic_condition(frame, OpenQubitModel::kExcitedLevel, total);
  r.adiabatic = est.value;
  if (est.diagnostics.has("gap_vanishes")) r.diagnostics.flag("gap_vanishes");

  const std::string ex = resolved_exact(c);
  if (ex == "master_equation") {
    const QubitTrajectory me = exact_qubit_me(decay, grid);
    r.diagnostics.merge(me.diagnostics);
    for (std::size_t i : idx) r.exact.push_back(me.fidelity(i));
  } else if (ex == "oracle") {
    OracleOptions opts;
    opts.substeps = c.solver.substeps;
    const auto bp = control->breakpoints();
    opts.breakpoints.assign(bp.begin(), bp.end());
    opts.kicks = model.liouville_kicks();
    const ComplexVector e0 = model.eigenvectors(0.0).col(OpenQubitModel::kExcitedLevel);
    const DensityTrajectory traj = bruteforce_liouville(model.lab_liouvillian(decay), e0 * e0.adjoint(), grid, opts);
    for (std::size_t i : idx) {
      const ComplexVector e = model.eigenvectors(grid.at(i)).col(OpenQubitModel::kExcitedLevel);
      r.exact.push_back(std::sqrt(std::max(0.0, e.dot(traj.rho[i] * e).real())));
    }
  }

  const std::string tc = resolved_tcl(c);
  if (tc != "none") {
    AdiabaticFrameOps ops = build_adiabatic_ops(frame, model.dissipator(decay));
    ops.breakpoints = event_list(*control);
    const PartitionBlocks blocks = partition(ops, OpenQubitModel::kTargetIndex);
    TrajectoryResult tr;
    KernelOptions ko;
    ko.include_f = c.solver.include_f;
    if (tc == "constant_gap") {
      ko.method = QuadratureMethod::prefix;
      const KernelTable kt = constant_gap_kernels(grid, total, r.average_gap, decay.kappa, ko);
      tr = propagate_projected(blocks, kt);
    } else if (tc == "kernels") {
      const BlockPropagators props = block_propagators(blocks, c.solver.substeps, c.solver.dressed);
      tr = propagate_projected(blocks, build_kernel_table(blocks, props, ko));
    } else {
      const BlockPropagators props = block_propagators(blocks, c.solver.substeps);
      tr = propagate_exact_tcl(blocks, props, interaction_picture(blocks, props), c.solver.substeps);
    }
    r.diagnostics.merge(tr.diagnostics);
    r.tcl = sqrt_abs(tr.value, idx);
  }
  return r;
}

MemberResult run_closed_member(const ExperimentConfig& c, double total, std::uint64_t member) {
  MemberResult r;
  auto control = std::make_shared<const Control>(make_signal(c.control, c.ensemble.seed, member), total);
  const TimeGrid grid(0.0, total, grid_steps(c, total, r.diagnostics));
  const auto idx = recorded_indices(c, grid.size());
  for (std::size_t i : idx) r.time.push_back(grid.at(i));
  r.average_gap = control->average_J(total);
  r.kappa_integral = 0.0;

  const bool rotating = c.model.name == "rotating_qubit";
  std::unique_ptr<RotatingFieldQubit> rq;
  std::unique_ptr<TwoQubitEffectiveModel> tq;
  ClosedProblem problem;
  if (rotating) {
    rq = std::make_unique<RotatingFieldQubit>(c.model.rotation_rate, c.model.z_field, control);
    problem = rq->closed_problem();
  } else {
    tq = std::make_unique<TwoQubitEffectiveModel>(total, control, c.model.noise_field);
    problem = tq->closed_problem();
  }
  const SpectralFrame frame = build_spectral_frame(problem.hamiltonian, grid, problem.hooks);
  const AdiabaticEstimate est = adiabatic_condition(frame, problem.target_level, total);
  r.adiabatic = est.value;
  if (est.diagnostics.has("gap_vanishes")) r.diagnostics.flag("gap_vanishes");
  auto tracked = [&](double t) -> ComplexVector {
    return rotating ? rq->eigenvectors(t).col(1) : tq->eigenvectors(t).col(1);
  };

  if (resolved_exact(c) == "oracle") {
    OracleOptions opts;
    opts.substeps = c.solver.substeps;
    const auto bp = control->breakpoints();
    opts.breakpoints.assign(bp.begin(), bp.end());
    if (rotating) {
      for (const Impulse& imp : control->impulses()) {
        opts.kicks.push_back({imp.time, matrix_exp((-kI * imp.amplitude) * rq->shape(imp.time))});
      }
      const auto psi = bruteforce_schrodinger([&](double t) { return rq->hamiltonian(t); }, rq->initial_state(),
                                              grid, opts);
      for (std::size_t i : idx) r.exact.push_back(std::abs(tracked(grid.at(i)).dot(psi[i])));
    } else {
      // Full pair dynamics; |up down>, |down up> are basis entries 1 and 2.
      for (const Impulse& imp : control->impulses()) {
        opts.kicks.push_back({imp.time, matrix_exp((-kI * imp.amplitude) * tq->pair_shape(imp.time))});
      }
      ComplexVector psi0 = ComplexVector::Zero(4);
      psi0.segment(1, 2) = tq->initial_state();
      const auto psi = bruteforce_schrodinger([&](double t) { return tq->pair_hamiltonian(t); }, psi0, grid, opts);
      for (std::size_t i : idx) {
        const ComplexVector sub = psi[i].segment(1, 2);
        r.exact.push_back(std::abs(tracked(grid.at(i)).dot(sub)));
      }
    }
  }

  const std::string tc = resolved_tcl(c);
  if (tc != "none") {
    ClosedOptions opts;
    opts.order = tc == "second_order" ? ClosedOrder::second : ClosedOrder::exact;
    opts.substeps = c.solver.substeps;
    const TrajectoryResult tr = propagate_closed(problem, grid, opts);
    r.diagnostics.merge(tr.diagnostics);
    r.tcl = modulus(tr.value, idx);
  }
  return r;
}

void reduce(const std::vector<MemberResult>& members, PointResult& p) {
  p.members = members.size();
  if (members.empty()) return;
  for (const auto& m : members) {
    p.diagnostics.merge(m.diagnostics);
    if (!m.error.empty()) {
      p.diagnostics.flag("point_failed", m.error);
    }
  }
  if (p.diagnostics.has("point_failed")) {
    p.time = {p.total_time};
    p.fidelity_exact = p.fidelity_tcl = p.stderr_exact = p.stderr_tcl = {kNaN};
    p.kappa_integral = p.average_gap = p.adiabatic_estimate = kNaN;
    return;
  }
  const double n = static_cast<double>(members.size());
  p.time = members.front().time;
  auto stats = [&](auto field, std::vector<double>& mean, std::vector<double>& se) {
    const std::size_t len = (members.front().*field).size();
    mean.assign(len, 0.0);
    se.assign(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
      double s = 0.0;
      for (const auto& m : members) s += (m.*field)[i];
      const double mu = s / n;
      double v = 0.0;
      for (const auto& m : members) v += ((m.*field)[i] - mu) * ((m.*field)[i] - mu);
      mean[i] = mu;
      se[i] = members.size() > 1 ? std::sqrt(v / (n - 1.0) / n) : 0.0;
    }
  };
  stats(&MemberResult::exact, p.fidelity_exact, p.stderr_exact);
  stats(&MemberResult::tcl, p.fidelity_tcl, p.stderr_tcl);
  double k = 0.0, g = 0.0, a = 0.0;
  for (const auto& m : members) {
    k += m.kappa_integral;
    g += m.average_gap;
    a = std::max(a, m.adiabatic);
  }
  p.kappa_integral = k / n;
  p.average_gap = g / n;
  p.adiabatic_estimate = a;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config) {
  validate(config);
  RunReport report;
  report.config = config;
  report.version = version_string();
  const std::size_t npts = config.time.values.size();
  const std::size_t members = config.control.variant == "impulse" ? config.ensemble.size
                                                                   : std::min<std::size_t>(config.ensemble.size, 1);
  std::vector<std::vector<MemberResult>> results(npts, std::vector<MemberResult>(members));
  parallel_for(npts * members, config.threads, [&](std::size_t job) {
    const std::size_t p = job / members, m = job % members;
    const double total = total_time_of(config, config.time.values[p]);
    MemberResult& out = results[p][m];
    try {
      out = is_open(config) ? run_open_member(config, total, m) : run_closed_member(config, total, m);
    } catch (const std::exception& e) {
      out = MemberResult{};
      out.error = e.what();
    }
  });
  for (std::size_t p = 0; p < npts; ++p) {
    PointResult pr;
    pr.sweep_value = config.time.values[p];
    pr.total_time = total_time_of(config, pr.sweep_value);
    reduce(results[p], pr);
    report.points.push_back(std::move(pr));
  }
  return report;
}

std::vector<RunReport> sweep(const ExperimentConfig& config, const std::string& path,
                             const std::vector<double>& values) {
  std::vector<ExperimentConfig> configs;
  for (double v : values) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    ExperimentConfig c = with_parameter(config, path, buf);
    c.sweep = {};
    validate(c);
    configs.push_back(std::move(c));
  }
  std::vector<RunReport> reports(values.size());
  const unsigned outer = std::max(1u, config.threads);
  parallel_for(values.size(), outer, [&](std::size_t i) {
    ExperimentConfig c = configs[i];
    c.threads = values.size() >= outer ? 1u : std::max(1u, outer / static_cast<unsigned>(values.size()));
    reports[i] = run_experiment(c);
    reports[i].config.threads = config.threads;
  });
  return reports;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double pick(const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : kNaN; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!dir.empty()) std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

std::string report_csv(const RunReport& report) {
  std::string out = "sweep_value,time,fidelity_exact,fidelity_tcl,stderr,flags\n";
  for (const PointResult& p : report.points) {
    if (p.members == 0) continue;
    const std::string flags = p.diagnostics.joined();
    const bool have_exact = !p.fidelity_exact.empty();
    for (std::size_t i = 0; i < p.time.size(); ++i) {
      const double se = have_exact ? pick(p.stderr_exact, i) : pick(p.stderr_tcl, i);
      out += fmt(p.sweep_value) + "," + fmt(p.time[i]) + "," + fmt(pick(p.fidelity_exact, i)) + "," +
             fmt(pick(p.fidelity_tcl, i)) + "," + fmt(se) + "," + flags + "\n";
    }
  }
  return out;
}

std::string report_json(const RunReport& report) {
  json j;
  j["version"] = report.version;
  j["seed"] = report.config.ensemble.seed;
  j["config"] = to_tree(report.config);
  j["solvers"] = {{"exact", resolved_exact(report.config)}, {"tcl", resolved_tcl(report.config)}};
  json pts = json::array();
  for (const PointResult& p : report.points) {
    json d = json::object();
    for (const auto& [k, v] : p.diagnostics.flags) d[k] = v;
    const std::size_t last = p.time.empty() ? 0 : p.time.size() - 1;
    pts.push_back({{"sweep_value", p.sweep_value},
                   {"total_time", p.total_time},
                   {"members", p.members},
                   {"kappa_integral", p.kappa_integral},
                   {"average_gap", p.average_gap},
                   {"adiabatic_estimate", p.adiabatic_estimate},
                   {"fidelity_exact", pick(p.fidelity_exact, last)},
                   {"fidelity_tcl", pick(p.fidelity_tcl, last)},
                   {"stderr_exact", pick(p.stderr_exact, last)},
                   {"stderr_tcl", pick(p.stderr_tcl, last)},
                   {"diagnostics", d}});
  }
  j["points"] = pts;
  return j.dump(2) + "\n";
}

void emit(const RunReport& report, const std::filesystem::path& dir, const std::string& stem) {
  ensure_dir(dir);
  write_file(dir / (stem + ".csv"), report_csv(report));
  write_file(dir / (stem + ".json"), report_json(report));
}

void emit_sweep(const std::vector<RunReport>& reports, const std::string& path, const std::vector<double>& values,
                const std::filesystem::path& dir) {
  ensure_dir(dir);
  json index;
  index["param"] = path;
  index["values"] = values;
  json runs = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::string stem = reports[i].config.id + "_" + std::to_string(i);
    emit(reports[i], dir, stem);
    runs.push_back({{"value", values[i]}, {"csv", stem + ".csv"}, {"json", stem + ".json"}});
  }
  index["runs"] = runs;
  write_file(dir / "index.json", index.dump(2) + "\n");
}

}  // namespace eigentrack
