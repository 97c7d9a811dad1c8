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

#include "htrm/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "htrm/error.hpp"

namespace htrm {

namespace {

std::uint64_t site_key(std::size_t i, std::size_t j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

void require_index_range(std::size_t n) {
  if (n == 0) throw DomainError("matrix dimension must be positive");
  if (n > (std::size_t{1} << 31)) throw DomainError("matrix dimension too large");
}

}  // namespace

std::string_view to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::dense_wigner: return "dense_wigner";
    case EnsembleKind::sparse_wigner: return "sparse_wigner";
    case EnsembleKind::band: return "band";
    case EnsembleKind::regular_graph: return "regular_graph";
    case EnsembleKind::covariance_factor: return "covariance_factor";
    case EnsembleKind::symmetrized_covariance: return "symmetrized_covariance";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(std::string_view name) {
  for (auto kind : {EnsembleKind::dense_wigner, EnsembleKind::sparse_wigner,
                    EnsembleKind::band, EnsembleKind::regular_graph,
                    EnsembleKind::covariance_factor,
                    EnsembleKind::symmetrized_covariance}) {
    if (to_string(kind) == name) return kind;
  }
  throw DomainError(fmt::format("unknown ensemble kind '{}'", name));
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> sparsity_mask(
    std::size_t n, double p_n, Rng& rng) {
  require_index_range(n);
  if (!(p_n > 0.0) || p_n > static_cast<double>(n)) {
    throw DomainError(fmt::format("p_n must lie in (0, n] (got {})", p_n));
  }
  const double keep = p_n / static_cast<double>(n);
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n + 1) / 2;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sites;

  if (keep >= 1.0) {
    sites.reserve(total);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        sites.emplace_back(static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(j));
      }
    }
    return sites;
  }

  sites.reserve(static_cast<std::size_t>(static_cast<double>(total) * keep * 1.05 + 64.0));
  // Geometric gaps between kept sites along the row-major upper triangle.
  const double log_miss = std::log1p(-keep);
  std::uint64_t pos = 0;
  std::size_t row = 0;
  std::uint64_t row_start = 0;
  while (pos < total) {
    const double gap = std::floor(std::log(rng.uniform()) / log_miss);
    if (gap >= static_cast<double>(total - pos)) break;
    pos += static_cast<std::uint64_t>(gap);
    while (pos >= row_start + (n - row)) {
      row_start += n - row;
      ++row;
    }
    sites.emplace_back(static_cast<std::uint32_t>(row),
                       static_cast<std::uint32_t>(row + (pos - row_start)));
    ++pos;
  }
  return sites;
}

EnsembleSample sample_sparse_wigner(std::size_t n, double p_n,
                                    const EntryLaw& law, Rng& rng,
                                    const WignerOptions& options) {
  if (!(options.diagonal_variance > 0.0)) {
    throw DomainError("diagonal variance must be positive");
  }
  EnsembleSample out;
  out.seed = rng.seed();
  const auto sites = sparsity_mask(n, p_n, rng);
  out.kind = p_n >= static_cast<double>(n) ? EnsembleKind::dense_wigner
                                           : EnsembleKind::sparse_wigner;
  out.rows = out.cols = n;
  out.scale = 1.0 / std::sqrt(p_n);

  const double diag_factor = std::sqrt(options.diagonal_variance);
  out.entries.reserve(sites.size());
  for (const auto& [i, j] : sites) {
    double v = sample(law, rng) * out.scale;
    if (i == j) v *= diag_factor;
    out.entries.push_back({i, j, v});
  }
  return out;
}

std::vector<std::size_t> RegularGraph::row_degrees() const {
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [i, j] : edges) {
    ++deg[i];
    if (i != j) ++deg[j];
  }
  return deg;
}

RegularGraph circulant_regular_adjacency(std::size_t n, std::size_t k) {
  require_index_range(n);
  if (k == 0 || k > n) {
    throw DomainError(fmt::format("degree must lie in [1, n] (got {})", k));
  }
  if (k % 2 == 0) {
    throw DomainError(fmt::format(
        "circulant band needs odd degree (got {}); use the matching construction",
        k));
  }
  RegularGraph g;
  g.n = n;
  g.degree = k;
  g.circulant = true;
  const std::size_t half = (k - 1) / 2;
  g.edges.reserve(n * (half + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d <= half; ++d) {
      const std::size_t j = (i + d) % n;
      g.edges.emplace_back(static_cast<std::uint32_t>(std::min(i, j)),
                           static_cast<std::uint32_t>(std::max(i, j)));
    }
  }
  return g;
}

RegularGraph matching_regular_adjacency(std::size_t n, std::size_t k, Rng& rng,
                                        int retry_cap) {
  require_index_range(n);
  if (n % 2 != 0) {
    throw DomainError(fmt::format("matching construction needs even n (got {})", n));
  }
  if (k == 0 || k >= n) {
    throw DomainError(fmt::format("degree must lie in [1, n-1] (got {})", k));
  }
  RegularGraph g;
  g.n = n;
  g.degree = k;
  g.edges.reserve(n / 2 * k);
  std::unordered_set<std::uint64_t> present;
  present.reserve(n / 2 * k * 2);

  std::vector<std::uint32_t> perm(n);
  for (std::size_t m = 0; m < k; ++m) {
    bool placed = false;
    for (int attempt = 0; attempt <= retry_cap && !placed; ++attempt) {
      std::iota(perm.begin(), perm.end(), 0u);
      for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(perm[i], perm[rng.below(i + 1)]);
      }
      bool clash = false;
      for (std::size_t p = 0; p < n && !clash; p += 2) {
        const auto a = std::min(perm[p], perm[p + 1]);
        const auto b = std::max(perm[p], perm[p + 1]);
        clash = present.contains(site_key(a, b));
      }
      if (clash) continue;
      for (std::size_t p = 0; p < n; p += 2) {
        const auto a = std::min(perm[p], perm[p + 1]);
        const auto b = std::max(perm[p], perm[p + 1]);
        present.insert(site_key(a, b));
        g.edges.emplace_back(a, b);
      }
      placed = true;
    }
    if (!placed) {
      throw RetryCapExceeded(fmt::format(
          "matching {} of {} collided {} times; fall back to a circulant band",
          m + 1, k, retry_cap + 1));
    }
  }
  return g;
}

EnsembleSample sample_weighted_regular(const RegularGraph& graph,
                                       const EntryLaw& law, Rng& rng) {
  if (graph.degree == 0) throw DomainError("graph degree must be positive");
  EnsembleSample out;
  out.kind = graph.circulant ? EnsembleKind::band : EnsembleKind::regular_graph;
  out.rows = out.cols = graph.n;
  out.scale = 1.0 / std::sqrt(static_cast<double>(graph.degree));
  out.seed = rng.seed();
  out.entries.reserve(graph.edges.size());
  for (const auto& [i, j] : graph.edges) {
    out.entries.push_back({i, j, sample(law, rng) * out.scale});
  }
  return out;
}

EnsembleSample sample_covariance_factor(std::size_t rows, std::size_t cols,
                                        const EntryLaw& law, Rng& rng) {
  require_index_range(rows);
  require_index_range(cols);
  EnsembleSample out;
  out.kind = EnsembleKind::covariance_factor;
  out.rows = rows;
  out.cols = cols;
  out.scale = 1.0;
  out.seed = rng.seed();
  out.entries.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out.entries.push_back({static_cast<std::uint32_t>(i),
                             static_cast<std::uint32_t>(j), sample(law, rng)});
    }
  }
  return out;
}

EnsembleSample symmetrize_covariance(const EnsembleSample& factor) {
  if (factor.kind != EnsembleKind::covariance_factor) {
    throw DomainError("symmetrize_covariance expects a covariance factor");
  }
  const std::size_t L = factor.rows;
  EnsembleSample out;
  out.kind = EnsembleKind::symmetrized_covariance;
  out.rows = out.cols = factor.rows + factor.cols;
  require_index_range(out.rows);
  out.block_rows = L;
  out.scale = factor.scale / std::sqrt(static_cast<double>(L));
  out.seed = factor.seed;
  const double s = 1.0 / std::sqrt(static_cast<double>(L));
  out.entries.reserve(factor.entries.size());
  for (const auto& t : factor.entries) {
    out.entries.push_back(
        {t.row, static_cast<std::uint32_t>(L + t.col), t.value * s});
  }
  return out;
}

EnsembleSample plant_spike(EnsembleSample sample,
                           const std::vector<Placement>& placements) {
  std::unordered_map<std::uint64_t, double> wanted;
  for (const auto& p : placements) {
    if (p.row >= sample.rows || p.col >= sample.cols) {
      throw DomainError(fmt::format("placement ({}, {}) outside {}x{} matrix",
                                    p.row, p.col, sample.rows, sample.cols));
    }
    std::size_t i = p.row;
    std::size_t j = p.col;
    if (sample.symmetric() && i > j) std::swap(i, j);
    if (!wanted.emplace(site_key(i, j), p.value).second) {
      throw DomainError(fmt::format("duplicate placement at site ({}, {})", i, j));
    }
  }
  for (auto& t : sample.entries) {
    const auto it = wanted.find(site_key(t.row, t.col));
    if (it == wanted.end()) continue;
    t.value = it->second;
    wanted.erase(it);
  }
  // Sites absent from a sparse sample are appended in placement order.
  for (const auto& p : placements) {
    std::size_t i = p.row;
    std::size_t j = p.col;
    if (sample.symmetric() && i > j) std::swap(i, j);
    if (wanted.contains(site_key(i, j))) {
      sample.entries.push_back({static_cast<std::uint32_t>(i),
                                static_cast<std::uint32_t>(j), p.value});
    }
  }
  return sample;
}

Eigen::MatrixXd to_dense(const EnsembleSample& sample) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(sample.rows), static_cast<Eigen::Index>(sample.cols));
  for (const auto& t : sample.entries) {
    m(t.row, t.col) = t.value;
    if (sample.symmetric()) m(t.col, t.row) = t.value;
  }
  return m;
}

Eigen::MatrixXd off_diagonal_block(const EnsembleSample& sample) {
  if (sample.kind == EnsembleKind::covariance_factor) return to_dense(sample);
  if (sample.kind != EnsembleKind::symmetrized_covariance) {
    throw DomainError("off_diagonal_block needs a covariance sample");
  }
  const auto L = static_cast<Eigen::Index>(sample.block_rows);
  const auto M = static_cast<Eigen::Index>(sample.rows) - L;
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(L, M);
  for (const auto& t : sample.entries) {
    if (static_cast<Eigen::Index>(t.row) < L && static_cast<Eigen::Index>(t.col) >= L) {
      block(t.row, t.col - L) = t.value;
    } else if (t.value != 0.0) {
      throw DomainError("symmetrized covariance sample has a nonzero diagonal block");
    }
  }
  return block;
}

}  // namespace htrm
