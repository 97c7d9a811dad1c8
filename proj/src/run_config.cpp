/*
 * Copyright (c) 2026, The htrm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "htrm/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "htrm/error.hpp"

namespace htrm {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"kind", "trials", "k", "seed", "threads", "tol", "reference_samples"}},
      {"ensemble", {"kind", "n", "mu", "degree", "diagonal_variance"}},
      {"law", {"family", "c", "tail_index", "crossover_point"}},
      {"decomposition",
       {"log_exponent", "threshold_override", "cut_level", "cut_sweep", "structural_bound", "delta",
        "check_cut_norm"}},
      {"localization", {"eps", "margin", "min_events"}},
      {"point_process", {"thresholds"}},
      {"spike", {"thetas"}},
      {"covariance", {"L", "M", "mode", "plant_x"}},
      {"output", {"dir", "prefix"}},
  };
  return keys;
}

double parse_double(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double v = 0.0;
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw DomainError(fmt::format("{}: '{}' is not a number", key, text));
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw DomainError(fmt::format("{}: '{}' is not a non-negative integer", key, text));
  }
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw DomainError(fmt::format("{}: '{}' is out of range", key, text));
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw DomainError(fmt::format("{}: '{}' is not a boolean", key, text));
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  const std::string t = boost::algorithm::trim_copy(text);
  if (t.empty()) return out;
  std::vector<std::string> parts;
  boost::algorithm::split(parts, t, boost::algorithm::is_any_of(","));
  for (auto& p : parts) out.push_back(parse_double(key, boost::algorithm::trim_copy(p)));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt::format("{}", v[i]);
  return s;
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw DomainError(fmt::format("config syntax error: {}", e.message()));
  }
  RunConfig rc;
  ExperimentConfig& c = rc.experiment;
  for (const auto& [section, body] : tree) {
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) {
      if (body.empty() && !body.data().empty()) {
        throw DomainError(fmt::format("key '{}' outside any section", section));
      }
      throw DomainError(fmt::format("unknown config section [{}]", section));
    }
    for (const auto& [key, node] : body) {
      if (!known->second.contains(key)) {
        throw DomainError(fmt::format("unknown config key '{}' in [{}]", key, section));
      }
      const std::string name = section + "." + key;
      const std::string value = boost::algorithm::trim_copy(node.data());
      if (section == "experiment") {
        if (key == "kind") c.kind = experiment_kind_from_string(value);
        if (key == "trials") c.trials = parse_unsigned(name, value);
        if (key == "k") c.k = parse_unsigned(name, value);
        if (key == "seed") c.master_seed = parse_unsigned(name, value);
        if (key == "threads") c.threads = parse_unsigned(name, value);
        if (key == "tol") c.tol = parse_double(name, value);
        if (key == "reference_samples") c.reference_samples = parse_unsigned(name, value);
      } else if (section == "ensemble") {
        if (key == "kind") c.ensemble = ensemble_kind_from_string(value);
        if (key == "n") c.n = parse_unsigned(name, value);
        if (key == "mu") c.mu = parse_double(name, value);
        if (key == "degree") c.degree = parse_unsigned(name, value);
        if (key == "diagonal_variance") c.diagonal_variance = parse_double(name, value);
      } else if (section == "law") {
        if (key == "family") c.law = law_family_from_string(value);
        if (key == "c") c.c = parse_double(name, value);
        if (key == "tail_index") c.tail_index = parse_double(name, value);
        if (key == "crossover_point") c.crossover_point = parse_double(name, value);
      } else if (section == "decomposition") {
        if (key == "log_exponent") c.log_exponent = parse_double(name, value);
        if (key == "threshold_override") c.threshold_override = parse_double(name, value);
        if (key == "cut_level") c.cut_level = parse_double(name, value);
        if (key == "cut_sweep") c.cut_sweep = parse_list(name, value);
        if (key == "structural_bound") c.structural_bound = parse_double(name, value);
        if (key == "delta") c.delta = parse_double(name, value);
        if (key == "check_cut_norm") c.check_cut_norm = parse_bool(name, value);
      } else if (section == "localization") {
        if (key == "eps") c.eps = parse_double(name, value);
        if (key == "margin") c.margin = parse_double(name, value);
        if (key == "min_events") c.min_events = parse_unsigned(name, value);
      } else if (section == "point_process") {
        c.thresholds = parse_list(name, value);
      } else if (section == "spike") {
        c.thetas = parse_list(name, value);
      } else if (section == "covariance") {
        if (key == "L") c.rows = parse_unsigned(name, value);
        if (key == "M") c.cols = parse_unsigned(name, value);
        if (key == "mode") c.mode = covariance_mode_from_string(value);
        if (key == "plant_x") c.plant_x = parse_double(name, value);
      } else if (section == "output") {
        if (key == "dir") rc.output_dir = value;
        if (key == "prefix") {
          if (value.empty() || value.find('/') != std::string::npos) {
            throw DomainError("output.prefix must be a non-empty file-name stem");
          }
          rc.prefix = value;
        }
      }
    }
  }
  validate(c);
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError(fmt::format("cannot open config file '{}'", path.string()));
  RunConfig rc = parse_run_config(in);
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    rc.output_dir = dir;
  }
  return rc;
}

std::string format_run_config(const RunConfig& rc) {
  const ExperimentConfig& c = rc.experiment;
  std::string s;
  s += "[experiment]\n";
  s += fmt::format("kind = {}\ntrials = {}\nk = {}\nseed = {}\nthreads = {}\ntol = {}\nreference_samples = {}\n",
                   to_string(c.kind), c.trials, c.k, c.master_seed, c.threads, c.tol,
                   c.reference_samples);
  s += "\n[ensemble]\n";
  s += fmt::format("kind = {}\nn = {}\nmu = {}\ndiagonal_variance = {}\n", to_string(c.ensemble), c.n,
                   c.mu, c.diagonal_variance);
  if (c.degree) s += fmt::format("degree = {}\n", *c.degree);
  s += "\n[law]\n";
  s += fmt::format("family = {}\nc = {}\n", to_string(c.law), c.c);
  if (c.tail_index) s += fmt::format("tail_index = {}\n", *c.tail_index);
  if (c.crossover_point) s += fmt::format("crossover_point = {}\n", *c.crossover_point);
  s += "\n[decomposition]\n";
  s += fmt::format("log_exponent = {}\ncut_level = {}\ncut_sweep = {}\ndelta = {}\ncheck_cut_norm = {}\n",
                   c.log_exponent, c.cut_level, join(c.cut_sweep), c.delta, c.check_cut_norm);
  if (c.threshold_override) s += fmt::format("threshold_override = {}\n", *c.threshold_override);
  if (c.structural_bound) s += fmt::format("structural_bound = {}\n", *c.structural_bound);
  s += "\n[localization]\n";
  s += fmt::format("eps = {}\nmargin = {}\nmin_events = {}\n", c.eps, c.margin, c.min_events);
  s += "\n[point_process]\n";
  s += fmt::format("thresholds = {}\n", join(c.thresholds));
  s += "\n[spike]\n";
  s += fmt::format("thetas = {}\n", join(c.thetas));
  s += "\n[covariance]\n";
  s += fmt::format("L = {}\nM = {}\nmode = {}\nplant_x = {}\n", c.rows, c.cols, to_string(c.mode),
                   c.plant_x);
  s += "\n[output]\n";
  s += fmt::format("dir = {}\nprefix = {}\n", rc.output_dir.string(), rc.prefix);
  return s;
}

}  // namespace htrm
