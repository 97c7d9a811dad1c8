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

#include "htrm/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "htrm/error.hpp"

namespace htrm {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void parse_metadata(const std::string& line, EnsembleSample& sample) {
  std::istringstream fields(line.substr(1));
  std::string token;
  fields >> token;
  if (token != "htrm") return;
  while (fields >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "kind") {
      sample.kind = ensemble_kind_from_string(value);
    } else if (key == "scale") {
      sample.scale = std::stod(value);
    } else if (key == "seed") {
      sample.seed = std::stoull(value);
    } else if (key == "block_rows") {
      sample.block_rows = std::stoull(value);
    }
  }
}

}  // namespace

void write_matrix_market(const EnsembleSample& sample, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real "
      << (sample.symmetric() ? "symmetric" : "general") << '\n';
  out << fmt::format("% htrm kind={} scale={} seed={} block_rows={}\n",
                     to_string(sample.kind), sample.scale, sample.seed,
                     sample.block_rows);
  out << fmt::format("{} {} {}\n", sample.rows, sample.cols, sample.entries.size());
  for (const auto& t : sample.entries) {
    if (sample.symmetric()) {
      out << fmt::format("{} {} {}\n", t.col + 1, t.row + 1, t.value);
    } else {
      out << fmt::format("{} {} {}\n", t.row + 1, t.col + 1, t.value);
    }
  }
}

EnsembleSample read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty MatrixMarket stream");
  std::istringstream header(lower(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
    throw DomainError("expected a MatrixMarket coordinate matrix header");
  }
  if (field != "real" && field != "double") {
    throw DomainError(fmt::format("unsupported MatrixMarket field '{}'", field));
  }
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") {
    throw DomainError(fmt::format("unsupported MatrixMarket symmetry '{}'", symmetry));
  }

  EnsembleSample sample;
  sample.kind = symmetric ? EnsembleKind::sparse_wigner : EnsembleKind::covariance_factor;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '%') {
      parse_metadata(line, sample);
      continue;
    }
    break;
  }
  std::istringstream size_line(line);
  std::size_t nnz = 0;
  if (!(size_line >> sample.rows >> sample.cols >> nnz)) {
    throw DomainError("malformed MatrixMarket size line");
  }
  if (symmetric != sample.symmetric()) {
    throw DomainError("MatrixMarket symmetry disagrees with the recorded kind");
  }
  if (symmetric && sample.rows != sample.cols) {
    throw DomainError("symmetric MatrixMarket matrix must be square");
  }
  sample.entries.reserve(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    std::size_t i = 0;
    std::size_t j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) {
      throw DomainError(fmt::format("MatrixMarket stream ended after {} of {} entries", e, nnz));
    }
    if (i == 0 || j == 0 || i > sample.rows || j > sample.cols) {
      throw DomainError(fmt::format("entry ({}, {}) out of range", i, j));
    }
    --i;
    --j;
    if (symmetric && i > j) std::swap(i, j);
    sample.entries.push_back(
        {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), v});
  }
  return sample;
}

}  // namespace htrm
