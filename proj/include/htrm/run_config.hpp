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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "htrm/experiments.hpp"

namespace htrm {

/// File form of a run: an INI document with one section per module.
///
///   [experiment]     kind, trials, k, seed, threads, tol, reference_samples
///   [ensemble]       kind, n, mu, degree, diagonal_variance
///   [law]            family, c, tail_index, crossover_point
///   [decomposition]  log_exponent, threshold_override, cut_level, cut_sweep,
///                    structural_bound, delta, check_cut_norm
///   [localization]   eps, margin, min_events
///   [point_process]  thresholds
///   [spike]          thetas
///   [covariance]     L, M, mode, plant_x
///   [output]         dir, prefix
///
/// Lists are comma separated. Unknown sections or keys are rejected.
struct RunConfig {
  ExperimentConfig experiment;
  std::filesystem::path output_dir = ".";
  std::string prefix = "run";
};

/// Name of the environment variable that overrides [output] dir.
inline constexpr const char* kOutputDirEnv = "HTRM_OUTPUT_DIR";

/// Parses an INI document. Throws DomainError on syntax errors, unknown
/// keys and out-of-domain values.
RunConfig parse_run_config(std::istream& in);

/// Reads a file and applies the output-directory environment override.
RunConfig load_run_config(const std::filesystem::path& path);

/// INI text that parses back to the same configuration.
std::string format_run_config(const RunConfig& config);

}  // namespace htrm
