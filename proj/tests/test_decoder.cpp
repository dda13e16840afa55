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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "fractalshor/builders.hpp"
#include "fractalshor/decoder.hpp"
#include "fractalshor/noise.hpp"

namespace fractalshor {
namespace {

constexpr std::int64_t kInf = INT64_MAX / 4;

struct RandomGraph {
    DecodingGraph graph;
    std::vector<Basis> basis;
};

// Graphlike mechanisms over a random basis split. Each basis gets a random
// spanning forest hooked to its boundary, so every detector reaches it.
RandomGraph random_graph(std::mt19937_64 &rng, std::uint32_t d) {
    std::uniform_real_distribution<double> prob(1e-4, 0.3);
    std::uniform_real_distribution<double> coin(0, 1);
    std::uniform_int_distribution<std::uint64_t> mask(0, 3);
    std::vector<Basis> basis(d);
    for (auto &b : basis) b = coin(rng) < 0.5 ? Basis::X : Basis::Z;
    std::vector<FaultMechanism> mechs;
    auto add = [&](std::vector<std::uint32_t> dets, Basis b) {
        FaultMechanism m;
        m.basis = b;
        m.detectors = std::move(dets);
        m.observables = mask(rng);
        m.probability = prob(rng);
        mechs.push_back(m);
    };
    for (std::uint32_t v = 0; v < d; v++) {
        std::vector<std::uint32_t> earlier;
        for (std::uint32_t u = 0; u < v; u++)
            if (basis[u] == basis[v]) earlier.push_back(u);
        if (earlier.empty() || coin(rng) < 0.3) {
            add({v}, basis[v]);
        } else {
            add({earlier[rng() % earlier.size()], v}, basis[v]);
        }
    }
    for (std::uint32_t u = 0; u < d; u++) {
        for (std::uint32_t v = u + 1; v < d; v++)
            if (basis[u] == basis[v] && coin(rng) < 0.25) add({u, v}, basis[u]);
        if (coin(rng) < 0.3) add({u}, basis[u]);
    }
    if (coin(rng) < 0.3) add({}, Basis::X);
    std::shuffle(mechs.begin(), mechs.end(), rng);
    RandomGraph out{build_graph(mechs, d, 2), basis};
    return out;
}

// All-pairs distances by Floyd-Warshall, never routing through a boundary.
std::vector<std::vector<std::int64_t>> all_pairs(const DecodingGraph &g) {
    std::uint32_t n = g.num_nodes();
    std::vector<std::vector<std::int64_t>> dist(n, std::vector<std::int64_t>(n, kInf));
    for (std::uint32_t v = 0; v < n; v++) dist[v][v] = 0;
    for (const auto &e : g.edges()) {
        if (e.u == e.v) continue;
        dist[e.u][e.v] = std::min(dist[e.u][e.v], e.int_weight());
        dist[e.v][e.u] = dist[e.u][e.v];
    }
    for (std::uint32_t k = 0; k < g.num_detectors(); k++)
        for (std::uint32_t i = 0; i < n; i++)
            for (std::uint32_t j = 0; j < n; j++)
                if (dist[i][k] + dist[k][j] < dist[i][j]) dist[i][j] = dist[i][k] + dist[k][j];
    return dist;
}

// Cheapest way to pair every event with another event or with its boundary.
std::int64_t brute_force(const DecodingGraph &g, const std::vector<std::vector<std::int64_t>> &dist,
                         std::vector<std::uint32_t> events) {
    if (events.empty()) return 0;
    std::uint32_t first = events.back();
    events.pop_back();
    std::int64_t best = kInf;
    std::int64_t to_boundary = dist[first][g.boundary(g.node_basis(first))];
    if (to_boundary < kInf) best = std::min(best, to_boundary + brute_force(g, dist, events));
    for (std::size_t k = 0; k < events.size(); k++) {
        if (dist[first][events[k]] >= kInf) continue;
        auto rest = events;
        rest.erase(rest.begin() + k);
        best = std::min(best, dist[first][events[k]] + brute_force(g, dist, rest));
    }
    return best;
}

std::vector<std::uint32_t> random_events(std::mt19937_64 &rng, std::uint32_t d, std::size_t max_events) {
    std::vector<std::uint32_t> all(d);
    for (std::uint32_t k = 0; k < d; k++) all[k] = k;
    std::shuffle(all.begin(), all.end(), rng);
    std::size_t k = rng() % (std::min<std::size_t>(d, max_events) + 1);
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

TEST(Decoder, EdgeWeights) {
    EXPECT_NEAR(edge_weight(0.01), std::log(99.0), 1e-12);
    GraphEdge e{0, 1, 0.01, 0};
    EXPECT_EQ(e.int_weight(), std::llround(std::log(99.0) * kWeightScale));
}

TEST(Decoder, GraphConstruction) {
    DecodingGraph g(3, 2);
    g.add_edge(0, 1, 0.1, 1, Basis::X);
    g.add_edge(1, 0, 0.2, 1, Basis::X);
    g.add_edge(0, 1, 0.05, 2, Basis::X);
    g.add_edge(2, g.boundary(Basis::Z), 0.01, 0, Basis::Z);
    ASSERT_EQ(g.edges().size(), 3u);
    EXPECT_NEAR(g.edges()[0].probability, 0.1 * 0.8 + 0.2 * 0.9, 1e-15);
    EXPECT_EQ(g.node_basis(2), Basis::Z);
    EXPECT_TRUE(g.basis_has_observables(Basis::X));
    EXPECT_FALSE(g.basis_has_observables(Basis::Z));
    EXPECT_THROW(g.add_edge(0, 1, 0.5, 0, Basis::X), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, 0, 0.1, 0, Basis::X), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, g.boundary(Basis::Z), 0.1, 0, Basis::X), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, 1, 0.1, 4, Basis::X), std::invalid_argument);
    // Merging two sub-half edges stays below one half.
    g.add_edge(0, 1, 0.45, 1, Basis::X);
    g.add_edge(0, 1, 0.45, 1, Basis::X);
    EXPECT_LT(g.edges()[0].probability, 0.5);
    EXPECT_THROW(DecodingGraph(1, 65), std::invalid_argument);
}

TEST(Decoder, ShortestPathsAvoidBoundary) {
    DecodingGraph g(2, 1);
    g.add_edge(0, g.boundary(Basis::X), 0.1, 1, Basis::X);
    g.add_edge(1, g.boundary(Basis::X), 0.1, 0, Basis::X);
    auto row = g.shortest_paths(0);
    EXPECT_EQ(row.distance[1], DecodingGraph::kUnreachable);
    EXPECT_EQ(row.observables[g.boundary(Basis::X)], 1u);
    g.add_edge(0, 1, 0.3, 1, Basis::X);
    g = DecodingGraph(g);
    auto r2 = g.cached_row(1);
    EXPECT_EQ(r2.distance[0], GraphEdge({0, 1, 0.3, 1}).int_weight());
    EXPECT_EQ(r2.observables[0], 1u);
}

TEST(Decoder, MatchesBruteForce) {
    std::mt19937_64 rng(2026);
    for (int trial = 0; trial < 400; trial++) {
        std::uint32_t d = 2 + trial % 13;
        auto rg = random_graph(rng, d);
        auto dist = all_pairs(rg.graph);
        for (int shot = 0; shot < 5; shot++) {
            auto events = random_events(rng, d, 8);
            DecodeResult res = decode_shot(rg.graph, events);
            ASSERT_EQ(res.weight, brute_force(rg.graph, dist, events)) << "trial " << trial;
            // The reported pairs cover every event once and add up to the weight.
            std::int64_t sum = 0;
            std::vector<std::uint32_t> covered;
            std::uint64_t mask = 0;
            for (auto [a, b] : res.pairs) {
                sum += dist[a][b];
                covered.push_back(a);
                if (!rg.graph.is_boundary(b)) covered.push_back(b);
                mask ^= rg.graph.shortest_paths(a).observables[b];
            }
            std::sort(covered.begin(), covered.end());
            EXPECT_EQ(covered, events);
            EXPECT_EQ(sum, res.weight);
            EXPECT_EQ(mask, res.prediction);
            EXPECT_EQ(predict_shot(rg.graph, events), res.prediction);
        }
    }
}

TEST(Decoder, SingleMechanismsDecodeToTheirMask) {
    // Distance 5: every single mechanism is corrected.
    for (auto basis : {Basis::X, Basis::Z}) {
        MemoryExperimentSpec spec;
        spec.lattice = LatticeSpec::square(5);
        spec.basis = basis;
        spec.rounds = 5;
        CompiledCircuit c(apply_noise(build_memory(spec), NoiseModel(0.001)));
        auto dem = extract_dem(c);
        auto g = build_graph(c);
        for (const auto &m : dem) EXPECT_EQ(predict_shot(g, m.detectors), m.observables);
    }
}

TEST(Decoder, ParallelMatchesReference) {
    MemoryExperimentSpec spec;
    spec.lattice = LatticeSpec::square(7);
    spec.schedule = ScheduleParams(3);
    spec.rounds = 7;
    CompiledCircuit c(apply_noise(build_memory(spec), NoiseModel(0.004)));
    auto g = build_graph(c);
    auto batch = sample(c, 600, 17);
    auto ref = decode_reference(g, batch);
    EXPECT_EQ(decode(g, batch, 1), ref);
    EXPECT_EQ(decode(g, batch, 3), ref);
    EXPECT_EQ(decode(build_graph(c), batch, 2), ref);
}

TEST(Decoder, TextRoundTrip) {
    std::mt19937_64 rng(5);
    auto rg = random_graph(rng, 9);
    std::stringstream text;
    rg.graph.write_text(text);
    auto back = DecodingGraph::read_text(text);
    ASSERT_EQ(back.edges().size(), rg.graph.edges().size());
    for (std::size_t k = 0; k < back.edges().size(); k++) {
        EXPECT_EQ(back.edges()[k].u, rg.graph.edges()[k].u);
        EXPECT_EQ(back.edges()[k].v, rg.graph.edges()[k].v);
        EXPECT_EQ(back.edges()[k].probability, rg.graph.edges()[k].probability);
        EXPECT_EQ(back.edges()[k].observables, rg.graph.edges()[k].observables);
    }
    for (std::uint32_t v = 0; v < 9; v++) EXPECT_EQ(back.node_basis(v), rg.graph.node_basis(v));
}

TEST(Decoder, TextFormat) {
    DecodingGraph g(8, 3);
    g.add_edge(3, 7, 0.01, 0b101, Basis::Z);
    g.add_edge(2, g.boundary(Basis::X), 0.25, 0, Basis::X);
    std::ostringstream out;
    g.write_text(out);
    EXPECT_EQ(out.str(),
              "graph detectors=8 observables=3\n"
              "edge D3 D7 w=4.5951 p=0.01 obs=0,2 basis=Z\n"
              "edge D2 BOUNDARY w=1.0986 p=0.25 obs=- basis=X\n");
    std::istringstream bad("graph detectors=2 observables=1\nedge D0 D9 w=1 p=0.1 obs=- basis=X\n");
    EXPECT_THROW(DecodingGraph::read_text(bad), std::exception);
}

}  // namespace
}  // namespace fractalshor
