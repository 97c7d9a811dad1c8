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
#include <vector>

#include "htrm/experiments.hpp"
#include "htrm/run_config.hpp"

namespace htrm {

/// Human-readable summary: run header, every score and summary printed
/// with 17 significant digits (so the stored doubles round-trip exactly),
/// and the notes.
void render_report(const RunManifest& manifest, std::ostream& out);

/// Plot-ready x,empirical_cdf,analytic_cdf rows.
void write_cdf_csv(const RunManifest& manifest, std::ostream& out);

struct RunOutputs {
  std::filesystem::path manifest;
  std::filesystem::path trials;
  std::filesystem::path cdf;
};

RunOutputs output_paths(const RunConfig& config);

/// Writes the manifest JSON, trial CSV and CDF CSV. On any failure the files
/// written so far are removed before the error propagates.
RunOutputs write_run_outputs(const RunConfig& config, const RunManifest& manifest);

RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace htrm
