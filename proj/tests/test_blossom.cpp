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
#include <random>
#include <vector>

#include "fractalshor/blossom.hpp"

namespace fractalshor {
namespace {

struct Best {
    std::int64_t weight = 0;
    int size = 0;
};

// Exhaustive search over matchings: vertex v is left single or paired with a later neighbor.
void search(int v, int n, const std::vector<std::vector<std::int64_t>> &w, std::vector<char> &used,
            std::int64_t weight, int size, bool max_cardinality, Best &best) {
    while (v < n && used[v]) v++;
    if (v == n) {
        bool better = max_cardinality ? (size > best.size || (size == best.size && weight > best.weight))
                                      : weight > best.weight;
        if (better) best = {weight, size};
        return;
    }
    used[v] = 1;
    search(v + 1, n, w, used, weight, size, max_cardinality, best);
    for (int u = v + 1; u < n; u++) {
        if (used[u] || w[v][u] == INT64_MIN) continue;
        used[u] = 1;
        search(v + 1, n, w, used, weight + w[v][u], size + 1, max_cardinality, best);
        used[u] = 0;
    }
    used[v] = 0;
}

Best brute_force(int n, const std::vector<WeightedEdge> &edges, bool max_cardinality) {
    std::vector<std::vector<std::int64_t>> w(n, std::vector<std::int64_t>(n, INT64_MIN));
    for (const auto &e : edges) {
        w[e.u][e.v] = std::max(w[e.u][e.v], e.weight);
        w[e.v][e.u] = w[e.u][e.v];
    }
    std::vector<char> used(n, 0);
    Best best;
    if (max_cardinality) best.size = -1;
    search(0, n, w, used, 0, 0, max_cardinality, best);
    return best;
}

Best evaluate(const std::vector<int> &mate, const std::vector<WeightedEdge> &edges) {
    Best out;
    for (std::size_t v = 0; v < mate.size(); v++) {
        if (mate[v] < 0) continue;
        EXPECT_EQ(mate[mate[v]], static_cast<int>(v));
        if (mate[v] < static_cast<int>(v)) continue;
        std::int64_t w = INT64_MIN;
        for (const auto &e : edges)
            if ((e.u == static_cast<int>(v) && e.v == mate[v]) || (e.v == static_cast<int>(v) && e.u == mate[v]))
                w = std::max(w, e.weight);
        EXPECT_NE(w, INT64_MIN) << "matched a non-edge";
        out.weight += w;
        out.size++;
    }
    return out;
}

std::vector<WeightedEdge> random_graph(std::mt19937_64 &rng, int n, double density, std::int64_t max_w) {
    std::uniform_real_distribution<double> coin(0, 1);
    std::uniform_int_distribution<std::int64_t> weight(-max_w / 4, max_w);
    std::vector<WeightedEdge> edges;
    for (int u = 0; u < n; u++)
        for (int v = u + 1; v < n; v++)
            if (coin(rng) < density) edges.push_back({u, v, weight(rng)});
    std::shuffle(edges.begin(), edges.end(), rng);
    return edges;
}

TEST(Blossom, Trivial) {
    EXPECT_TRUE(max_weight_matching(0, {}).empty());
    EXPECT_EQ(max_weight_matching(3, {}), (std::vector<int>{-1, -1, -1}));
    std::vector<WeightedEdge> one{{0, 1, 5}};
    EXPECT_EQ(max_weight_matching(2, one), (std::vector<int>{1, 0}));
    std::vector<WeightedEdge> negative{{0, 1, -5}};
    EXPECT_EQ(max_weight_matching(2, negative), (std::vector<int>{-1, -1}));
    EXPECT_EQ(max_weight_matching(2, negative, true), (std::vector<int>{1, 0}));
}

TEST(Blossom, PathPrefersOuterPair) {
    std::vector<WeightedEdge> path{{0, 1, 5}, {1, 2, 8}, {2, 3, 5}};
    EXPECT_EQ(max_weight_matching(4, path), (std::vector<int>{1, 0, 3, 2}));
}

TEST(Blossom, NestedBlossomsAndExpansion) {
    // Classic cases with an S-blossom that later has to be relabeled and expanded.
    struct Case {
        int n;
        std::vector<WeightedEdge> edges;
        std::vector<int> mate;
    };
    std::vector<Case> cases{
        {5, {{1, 2, 8}, {1, 3, 9}, {2, 3, 10}, {3, 4, 7}}, {-1, 2, 1, 4, 3}},
        {7, {{1, 2, 9}, {1, 3, 8}, {2, 3, 10}, {1, 4, 5}, {4, 5, 4}, {1, 6, 3}}, {-1, 6, 3, 2, 5, 4, 1}},
        {7, {{1, 2, 9}, {1, 3, 9}, {2, 3, 10}, {2, 4, 8}, {3, 5, 8}, {4, 5, 10}, {5, 6, 6}}, {-1, 3, 4, 1, 2, 6, 5}},
        {9,
         {{1, 2, 10}, {1, 7, 10}, {2, 3, 12}, {3, 4, 20}, {3, 5, 20}, {4, 5, 25}, {5, 6, 10}, {6, 7, 10}, {7, 8, 8}},
         {-1, 2, 1, 4, 3, 6, 5, 8, 7}},
        {9,
         {{1, 2, 8}, {1, 3, 8}, {2, 3, 10}, {2, 4, 12}, {3, 5, 12}, {4, 5, 14}, {4, 6, 12}, {5, 7, 12},
          {6, 7, 14}, {7, 8, 12}},
         {-1, 2, 1, 5, 6, 3, 4, 8, 7}},
        {9, {{1, 2, 23}, {1, 5, 22}, {1, 6, 15}, {2, 3, 25}, {3, 4, 22}, {4, 5, 25}, {4, 8, 14}, {5, 7, 13}},
         {-1, 6, 3, 2, 8, 7, 1, 5, 4}},
    };
    for (const auto &c : cases) EXPECT_EQ(max_weight_matching(c.n, c.edges), c.mate);
}

TEST(Blossom, RandomAgainstExhaustive) {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 3000; trial++) {
        int n = 1 + trial % 11;
        double density = trial % 3 == 0 ? 1.0 : 0.45;
        auto edges = random_graph(rng, n, density, trial % 2 ? 10 : 1000000);
        for (bool card : {false, true}) {
            Best want = brute_force(n, edges, card);
            Best got = evaluate(max_weight_matching(n, edges, card), edges);
            ASSERT_EQ(got.weight, want.weight) << "trial " << trial << " card " << card;
            if (card) {
                ASSERT_EQ(got.size, want.size);
            }
        }
    }
}

TEST(Blossom, CertificateDecidesMissingEdges) {
    std::mt19937_64 rng(7);
    int improving = 0;
    for (int trial = 0; trial < 1500; trial++) {
        int n = 2 + trial % 10;
        auto edges = random_graph(rng, n, 0.5, 200);
        CertifiedMatching cm(n, edges);
        Best base = evaluate(cm.mate(), edges);
        ASSERT_EQ(base.weight, brute_force(n, edges, false).weight);
        for (const auto &e : edges) {
            std::int64_t s = cm.slack(e.u, e.v, e.weight);
            ASSERT_GE(s, 0);
            if (cm.mate()[e.u] == e.v && e.weight > 0) {
                // Matched edges are tight, except duplicates of a heavier edge.
                bool heavier = std::any_of(edges.begin(), edges.end(), [&](const WeightedEdge &f) {
                    return ((f.u == e.u && f.v == e.v) || (f.u == e.v && f.v == e.u)) && f.weight > e.weight;
                });
                if (!heavier) {
                    ASSERT_EQ(s, 0);
                }
            }
        }
        for (int v = 0; v < n; v++) ASSERT_GE(cm.vertex_dual(v), 0);
        std::uniform_int_distribution<int> node(0, n - 1);
        std::uniform_int_distribution<std::int64_t> weight(0, 300);
        for (int probe = 0; probe < 5; probe++) {
            WeightedEdge extra{node(rng), node(rng), weight(rng)};
            if (extra.u == extra.v) continue;
            auto more = edges;
            more.push_back(extra);
            bool improves = brute_force(n, more, false).weight > base.weight;
            // Duals are not unique: a violated edge need not improve, but
            // an improving edge is always violated.
            if (cm.slack(extra.u, extra.v, extra.weight) >= 0) {
                ASSERT_FALSE(improves) << trial;
            }
            improving += improves;
        }
    }
    EXPECT_GT(improving, 100);
}

TEST(Blossom, RejectsBadInput) {
    std::vector<WeightedEdge> loop{{1, 1, 3}};
    EXPECT_THROW(max_weight_matching(2, loop), std::invalid_argument);
    std::vector<WeightedEdge> out_of_range{{0, 4, 3}};
    EXPECT_THROW(max_weight_matching(2, out_of_range), std::invalid_argument);
}

}  // namespace
}  // namespace fractalshor
