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

#include "htrm/report.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "htrm/error.hpp"

namespace htrm {

namespace {

std::string exact(double x) { return fmt::format("{:.17g}", x); }

template <typename Writer>
void write_file(const std::filesystem::path& path, std::vector<std::filesystem::path>& created,
                Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError(fmt::format("cannot write '{}'", path.string()));
  created.push_back(path);
  writer(out);
  out.flush();
  if (!out) throw InternalError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

void render_report(const RunManifest& m, std::ostream& out) {
  out << fmt::format("{} — {} run\n", m.version, to_string(m.kind));
  out << fmt::format("trials: {}  excluded: {}  status: {}\n", m.trials.rows.size(), m.excluded,
                     m.failed ? "FAILED (" + m.failure + ")" : "ok");
  out << fmt::format("wall clock: {:.3f} s\n", m.wall_clock_seconds);
  std::size_t width = 5;
  for (const auto& [k, v] : m.scores) width = std::max(width, k.size());
  for (const auto& [k, v] : m.summaries) width = std::max(width, k.size());
  out << "\nscores\n";
  for (const auto& [k, v] : m.scores) out << fmt::format("  {:<{}}  {}\n", k, width, exact(v));
  out << "\nsummaries\n";
  for (const auto& [k, v] : m.summaries) out << fmt::format("  {:<{}}  {}\n", k, width, exact(v));
  if (!m.notes.empty()) {
    out << "\nnotes\n";
    for (const auto& n : m.notes) out << "  - " << n << '\n';
  }
}

void write_cdf_csv(const RunManifest& m, std::ostream& out) {
  out << "x,empirical_cdf,analytic_cdf\n";
  for (const auto& p : m.cdf_table) {
    out << exact(p.x) << ',' << exact(p.empirical) << ',' << exact(p.analytic) << '\n';
  }
}

RunOutputs output_paths(const RunConfig& config) {
  const auto& dir = config.output_dir;
  return {dir / (config.prefix + ".manifest.json"), dir / (config.prefix + ".trials.csv"),
          dir / (config.prefix + ".cdf.csv")};
}

RunOutputs write_run_outputs(const RunConfig& config, const RunManifest& manifest) {
  const RunOutputs paths = output_paths(config);
  std::vector<std::filesystem::path> created;
  try {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw DomainError(fmt::format("cannot create '{}': {}", config.output_dir.string(), ec.message()));
    write_file(paths.manifest, created,
               [&](std::ostream& out) { out << manifest_to_json(manifest).dump(2) << '\n'; });
    write_file(paths.trials, created, [&](std::ostream& out) { write_trials_csv(manifest, out); });
    write_file(paths.cdf, created, [&](std::ostream& out) { write_cdf_csv(manifest, out); });
  } catch (...) {
    for (const auto& p : created) {
      std::error_code ignored;
      std::filesystem::remove(p, ignored);
    }
    throw;
  }
  return paths;
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError(fmt::format("cannot open manifest '{}'", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(fmt::format("manifest '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return manifest_from_json(j);
}

}  // namespace htrm
