// Copyright 2026 fractalshor contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FRACTALSHOR_BLOSSOM_HPP
#define FRACTALSHOR_BLOSSOM_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace fractalshor {

struct WeightedEdge {
    int u;
    int v;
    std::int64_t weight;
};

/// Edmonds' blossom algorithm with dual variables (O(n^3)), integer weights.
/// Returns mate[v] (or -1) for a matching of maximum total weight; with
/// max_cardinality, maximum weight among maximum-cardinality matchings.
/// Deterministic for a given edge order.
std::vector<int> max_weight_matching(int num_vertices, std::span<const WeightedEdge> edges,
                                     bool max_cardinality = false);

/// Maximum-weight matching together with its optimal dual solution, which
/// can certify that edges left out of the input would not improve it.
class CertifiedMatching {
   public:
    CertifiedMatching(int num_vertices, std::span<const WeightedEdge> edges);

    const std::vector<int> &mate() const { return mate_; }
    /// Reduced cost of a (possibly absent) edge, in doubled units. The
    /// matching stays optimal with the edge added iff this is >= 0.
    std::int64_t slack(int u, int v, std::int64_t weight) const;
    std::int64_t vertex_dual(int v) const { return dual_[v]; }

   private:
    std::vector<int> mate_;
    std::vector<std::int64_t> dual_;          // vertex duals, then blossom duals
    std::vector<std::vector<int>> ancestors_;  // enclosing blossoms of each vertex, innermost first
};

}  // namespace fractalshor

#endif
