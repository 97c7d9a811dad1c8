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

#include <iosfwd>

#include "htrm/ensembles.hpp"

namespace htrm {

/// Writes MatrixMarket coordinate text. Symmetric kinds use the `symmetric`
/// qualifier (lower triangle on disk); provenance goes into a `% htrm`
/// comment line so read_matrix_market() can restore it.
void write_matrix_market(const EnsembleSample& sample, std::ostream& out);

/// Parses `coordinate real` files with `general` or `symmetric` storage.
/// Throws DomainError on malformed input.
EnsembleSample read_matrix_market(std::istream& in);

}  // namespace htrm
