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

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "htrm/rng.hpp"
#include "htrm/tail_laws.hpp"

namespace htrm {

enum class EnsembleKind {
  dense_wigner,
  sparse_wigner,
  band,
  regular_graph,
  covariance_factor,
  symmetrized_covariance,
};

std::string_view to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(std::string_view name);

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// One realization of a random matrix in triplet form.
///
/// Symmetric kinds hold each unordered site once with row <= col; the
/// materialized matrix mirrors them. Rectangular kinds (covariance_factor)
/// hold rows x cols sites with no mirroring. `scale` records the
/// normalization already applied to the stored values.
struct EnsembleSample {
  EnsembleKind kind = EnsembleKind::dense_wigner;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Triplet> entries;
  double scale = 1.0;
  std::uint64_t seed = 0;
  /// Split point of the block embedding for symmetrized_covariance (= L).
  std::size_t block_rows = 0;

  bool symmetric() const { return kind != EnsembleKind::covariance_factor; }
  std::size_t dim() const { return rows; }
};

struct WignerOptions {
  /// Variance of the diagonal entries relative to the off-diagonal ones.
  double diagonal_variance = 1.0;
};

/// Upper-triangle sites (i <= j, row-major) kept independently with
/// probability p_n / n. Consumes no randomness when p_n = n.
std::vector<std::pair<std::uint32_t, std::uint32_t>> sparsity_mask(
    std::size_t n, double p_n, Rng& rng);

/// Diluted Wigner matrix: each upper-triangle site is kept with probability
/// p_n / n and carries a / sqrt(p_n). p_n = n yields the dense Wigner matrix.
EnsembleSample sample_sparse_wigner(std::size_t n, double p_n,
                                    const EntryLaw& law, Rng& rng,
                                    const WignerOptions& options = {});

/// Undirected graph with every vertex of degree exactly `degree` (a
/// self-loop contributes one to the degree of its vertex).
struct RegularGraph {
  std::size_t n = 0;
  std::size_t degree = 0;
  bool circulant = false;
  /// Unordered edges (i <= j), each listed once.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  std::vector<std::size_t> row_degrees() const;
};

/// Periodic band |i - j|_n <= b with k = 2b + 1, diagonal included. Throws
/// DomainError for even k or k > n.
RegularGraph circulant_regular_adjacency(std::size_t n, std::size_t k);

/// Thrown when the matching construction cannot avoid multi-edges.
class RetryCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Union of k independent uniform perfect matchings on an even vertex set.
/// A matching that collides with an earlier one is redrawn, at most
/// `retry_cap` times per matching.
RegularGraph matching_regular_adjacency(std::size_t n, std::size_t k, Rng& rng,
                                        int retry_cap = 100);

/// Weights every structural edge with an independent a / sqrt(k).
EnsembleSample sample_weighted_regular(const RegularGraph& graph,
                                       const EntryLaw& law, Rng& rng);

/// Raw L x M matrix S with i.i.d. entries (no normalization).
EnsembleSample sample_covariance_factor(std::size_t rows, std::size_t cols,
                                        const EntryLaw& law, Rng& rng);

/// Block embedding [[0, S/sqrt(L)], [S^T/sqrt(L), 0]] of a covariance
/// factor. Its squared top eigenvalue is the top eigenvalue of S S^T / L.
EnsembleSample symmetrize_covariance(const EnsembleSample& factor);

struct Placement {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Overwrites (and for symmetric kinds mirrors) the listed sites. Throws
/// DomainError when two placements address the same site.
EnsembleSample plant_spike(EnsembleSample sample,
                           const std::vector<Placement>& placements);

Eigen::MatrixXd to_dense(const EnsembleSample& sample);

/// Dense L x M factor of a symmetrized_covariance or covariance_factor
/// sample, in the stored normalization.
Eigen::MatrixXd off_diagonal_block(const EnsembleSample& sample);

}  // namespace htrm
