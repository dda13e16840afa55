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

#ifndef FRACTALSHOR_DECODER_HPP
#define FRACTALSHOR_DECODER_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fractalshor/frame_sim.hpp"

namespace fractalshor {

/// Fixed-point scale applied to edge weights before matching.
inline constexpr double kWeightScale = 65536.0;

/// -ln(p/(1-p)).
double edge_weight(double p);

struct GraphEdge {
    std::uint32_t u;  // node ids; u < v
    std::uint32_t v;
    double probability;
    std::uint64_t observables;
    double weight() const { return edge_weight(probability); }
    std::int64_t int_weight() const;
};

/// Nodes 0..D-1 are detectors, D is the X-basis boundary and D+1 the
/// Z-basis boundary. Identical (u, v, observables) edges are merged; edges
/// with the same endpoints but different masks are kept side by side.
class DecodingGraph {
   public:
    DecodingGraph(std::uint32_t num_detectors, std::uint32_t num_observables);

    std::uint32_t num_detectors() const { return num_detectors_; }
    std::uint32_t num_observables() const { return num_observables_; }
    std::uint32_t num_nodes() const { return num_detectors_ + 2; }
    std::uint32_t boundary(Basis b) const { return num_detectors_ + (b == Basis::X ? 0 : 1); }
    bool is_boundary(std::uint32_t node) const { return node >= num_detectors_; }
    Basis node_basis(std::uint32_t node) const { return basis_[node]; }
    void set_detector_basis(std::uint32_t detector, Basis basis);
    /// Whether any edge of this basis component carries an observable.
    bool basis_has_observables(Basis basis) const;
    const std::vector<GraphEdge> &edges() const { return edges_; }

    /// Adds (or merges into) an edge. `v` may be a boundary node, and u == v
    /// is allowed only for a boundary.
    void add_edge(std::uint32_t u, std::uint32_t v, double p, std::uint64_t observables, Basis basis);

    /// Incident edge indices per node.
    std::span<const std::uint32_t> incident(std::uint32_t node) const;

    struct Row {
        std::vector<std::int64_t> distance;  // kUnreachable when no path
        std::vector<std::uint64_t> observables;
    };
    static constexpr std::int64_t kUnreachable = INT64_MAX;

    /// Shortest paths from `node` over integer weights, by Dijkstra. The
    /// cached variant fills each row once and is safe to call concurrently.
    Row shortest_paths(std::uint32_t node) const;
    const Row &cached_row(std::uint32_t node) const;

    void write_text(std::ostream &out) const;
    static DecodingGraph read_text(std::istream &in);

   private:
    void finalize_adjacency() const;

    std::uint32_t num_detectors_;
    std::uint32_t num_observables_;
    std::vector<Basis> basis_;
    std::vector<GraphEdge> edges_;
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint64_t>, std::uint32_t> edge_index_;
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

/// One edge per mechanism. A mechanism without detectors that flips
/// observables becomes a self-loop on its boundary; one that flips nothing is
/// skipped. Throws std::invalid_argument if a merged probability reaches 0.5
/// and NonGraphlikeError for a mechanism with more than two detectors.
DecodingGraph build_graph(std::span<const FaultMechanism> mechanisms, std::uint32_t num_detectors,
                          std::uint32_t num_observables);
DecodingGraph build_graph(const CompiledCircuit &circuit);

struct DecodeResult {
    std::uint64_t prediction = 0;
    std::int64_t weight = 0;  // total integer weight of the chosen pairing
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // second is a boundary node when unpaired
};

/// Minimum-weight pairing of the fired detectors to each other or to their
/// boundary, then the XOR of the path masks.
DecodeResult decode_shot(const DecodingGraph &graph, std::span<const std::uint32_t> fired);

/// Same prediction as decode_shot, skipping events of a basis component
/// whose edges carry no observables (they cannot change the prediction).
std::uint64_t predict_shot(const DecodingGraph &graph, std::span<const std::uint32_t> fired);

/// Predicted observable mask per shot. `threads` 0 means the OpenMP default.
std::vector<std::uint64_t> decode(const DecodingGraph &graph, const SyndromeBatch &batch, int threads = 0);

/// Serial version that recomputes shortest paths instead of using the cache.
std::vector<std::uint64_t> decode_reference(const DecodingGraph &graph, const SyndromeBatch &batch);

}  // namespace fractalshor

#endif
