// Copyright 2026 The nmqtraj Authors
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

#include "nmqt/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "nmqt/errors.hpp"

namespace nmqt {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError("scenario: " + path + ": " + message);
}

void require_object(const json& node, const std::string& path) {
  if (!node.is_object()) fail(path, "expected an object");
}

// Strict schema: every present key must be in the allowed set.
void check_keys(const json& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : node.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
  }
}

double get_number(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "expected a number");
  return node.get<double>();
}

double get_optional_number(const json& obj, const char* key, const std::string& prefix,
                           double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj.at(key), prefix.empty() ? key : prefix + "." + key);
}

std::uint64_t get_seed(const json& node, const std::string& path) {
  if (node.is_number_unsigned()) return node.get<std::uint64_t>();
  if (node.is_number_integer() && node.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(node.get<std::int64_t>());
  }
  fail(path, "expected a non-negative integer");
}

std::size_t get_count(const json& node, const std::string& path) {
  if (node.is_number_unsigned()) return node.get<std::size_t>();
  if (node.is_number_integer() && node.get<std::int64_t>() > 0) {
    return static_cast<std::size_t>(node.get<std::int64_t>());
  }
  fail(path, "expected a positive integer");
}

StateVector parse_initial_state(const json& node, const std::string& path, Eigen::Index dim) {
  if (node.is_string()) {
    const std::string name = node.get<std::string>();
    if (name == "plus") return plus_state();
    if (name == "ground") {
      StateVector psi = StateVector::Zero(dim);
      psi[0] = 1.0;
      return psi;
    }
    if (name == "excited") {
      StateVector psi = StateVector::Zero(dim);
      psi[dim - 1] = 1.0;
      return psi;
    }
    fail(path, "expected \"plus\", \"ground\", \"excited\", or an amplitude list; got \"" + name +
                   "\"");
  }
  if (!node.is_array()) fail(path, "expected a state name or an amplitude list");
  if (static_cast<Eigen::Index>(node.size()) != dim) {
    fail(path, "expected " + std::to_string(dim) + " amplitudes");
  }
  StateVector psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const json& amp = node.at(static_cast<std::size_t>(i));
    const std::string amp_path = path + "[" + std::to_string(i) + "]";
    if (amp.is_number()) {
      psi[i] = Complex(amp.get<double>(), 0.0);
    } else if (amp.is_array() && amp.size() == 2 && amp.at(0).is_number() &&
               amp.at(1).is_number()) {
      psi[i] = Complex(amp.at(0).get<double>(), amp.at(1).get<double>());
    } else {
      fail(amp_path, "expected a real number or a [re, im] pair");
    }
  }
  return psi;
}

NamedObservable parse_observable(const json& node, const std::string& path) {
  if (!node.is_string()) fail(path, "expected an observable name");
  const std::string name = node.get<std::string>();
  if (name == "sigma_x") return {name, sigma_x()};
  if (name == "sigma_y") return {name, sigma_y()};
  if (name == "sigma_z") return {name, sigma_z()};
  fail(path, "unknown observable \"" + name + "\" (expected sigma_x, sigma_y, or sigma_z)");
}

Scenario parse_document(const json& doc, const std::string& origin) {
  require_object(doc, origin);
  check_keys(doc, "",
             {"method", "bath", "system", "initial_state", "observables", "ensemble_size", "dt",
              "t_end", "epsilon", "m", "seed", "kde_bandwidth", "output", "eps_sweep"});

  Scenario scenario;
  RunConfig& config = scenario.config;

  if (!doc.contains("method")) fail("method", "required key is missing");
  if (!doc.at("method").is_string()) fail("method", "expected a string");
  config.method = parse_method(doc.at("method").get<std::string>());

  BathSpec bath;
  if (doc.contains("bath")) {
    const json& node = doc.at("bath");
    require_object(node, "bath");
    check_keys(node, "bath", {"g", "Gamma", "omega_c"});
    bath.g = get_optional_number(node, "g", "bath", bath.g);
    bath.gamma = get_optional_number(node, "Gamma", "bath", bath.gamma);
    bath.omega_c = get_optional_number(node, "omega_c", "bath", bath.omega_c);
  }
  config.bath = bath;

  double omega = 2.0;
  double rabi = 0.5;
  if (doc.contains("system")) {
    const json& node = doc.at("system");
    require_object(node, "system");
    check_keys(node, "system", {"omega", "Omega"});
    omega = get_optional_number(node, "omega", "system", omega);
    rabi = get_optional_number(node, "Omega", "system", rabi);
  }
  config.system = make_two_level_system(omega, rabi);

  config.initial_state = doc.contains("initial_state")
                             ? parse_initial_state(doc.at("initial_state"), "initial_state",
                                                   config.system.dim())
                             : plus_state();

  if (doc.contains("observables")) {
    const json& node = doc.at("observables");
    if (!node.is_array()) fail("observables", "expected a list of observable names");
    config.observables.clear();
    for (std::size_t i = 0; i < node.size(); ++i) {
      config.observables.push_back(
          parse_observable(node.at(i), "observables[" + std::to_string(i) + "]"));
    }
  } else {
    config.observables = {{"sigma_x", sigma_x()}, {"sigma_z", sigma_z()}};
  }

  if (doc.contains("ensemble_size")) {
    config.ensemble_size = get_count(doc.at("ensemble_size"), "ensemble_size");
  }
  config.dt = get_optional_number(doc, "dt", "", config.dt);
  config.t_end = get_optional_number(doc, "t_end", "", config.t_end);
  config.epsilon = get_optional_number(doc, "epsilon", "", config.epsilon);
  if (doc.contains("m")) {
    config.m_channels = static_cast<int>(get_count(doc.at("m"), "m"));
  }
  if (doc.contains("seed")) config.seed = get_seed(doc.at("seed"), "seed");
  if (doc.contains("kde_bandwidth")) {
    const double sigma = get_number(doc.at("kde_bandwidth"), "kde_bandwidth");
    if (!(sigma > 0.0)) fail("kde_bandwidth", "must be > 0");
    config.kde_bandwidth_override = sigma;
  }
  if (doc.contains("output")) {
    if (!doc.at("output").is_string()) fail("output", "expected a path string");
    scenario.output_path = doc.at("output").get<std::string>();
  }
  if (doc.contains("eps_sweep")) {
    const json& node = doc.at("eps_sweep");
    if (!node.is_array() || node.empty()) fail("eps_sweep", "expected a non-empty list of numbers");
    scenario.eps_sweep.clear();
    for (std::size_t i = 0; i < node.size(); ++i) {
      const std::string path = "eps_sweep[" + std::to_string(i) + "]";
      const double eps = get_number(node.at(i), path);
      if (!(eps > 0.0)) fail(path, "must be > 0");
      scenario.eps_sweep.push_back(eps);
    }
  }

  config.validate();
  return scenario;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario: " + origin + ": " + e.what());
  }
  return parse_document(doc, origin);
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read scenario file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed while reading scenario file " + path);
  return parse_scenario_text(buffer.str(), path);
}

}  // namespace nmqt
