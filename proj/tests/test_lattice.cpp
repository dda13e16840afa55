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

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fractalshor/lattice.hpp"

namespace fractalshor {
namespace {

// Direct evaluation of t == b * (4^(L+1) - 1) / 3 (mod 4^(L+1)).
bool include_formula(const Edge &edge, std::int64_t t, int pitch) {
    int b = interleave_b(edge);
    int l = 0;
    for (int e = edge.index; e % pitch == 0; e /= pitch) l++;
    std::int64_t mod = 1;
    for (int k = 0; k <= l; k++) mod *= 4;
    std::int64_t target = b * (mod - 1) / 3;
    return ((t % mod) + mod) % mod == target % mod;
}

std::vector<Edge> all_edges(const LatticeSpec &lat) {
    std::vector<Edge> out;
    for (int e = 1; e < lat.cols; e++)
        for (int r = 0; r < lat.rows; r++) out.push_back({Orientation::Horizontal, e, r});
    for (int e = 1; e < lat.rows; e++)
        for (int c = 0; c < lat.cols; c++) out.push_back({Orientation::Vertical, e, c});
    return out;
}

TEST(Lattice, QubitNumbering) {
    LatticeSpec lat(3, 4);
    EXPECT_EQ(lat.num_qubits(), 12);
    EXPECT_EQ(lat.qubit(2, 1), 9);
    EXPECT_EQ((Edge{Orientation::Horizontal, 2, 1}.qubits(lat)), std::make_pair(5, 6));
    EXPECT_EQ((Edge{Orientation::Vertical, 1, 3}.qubits(lat)), std::make_pair(3, 7));
    EXPECT_THROW(LatticeSpec(0, 3), std::invalid_argument);
}

TEST(Lattice, InterleaveExamples) {
    EXPECT_EQ(interleave_b({Orientation::Vertical, 1, 0}), 0);
    EXPECT_EQ(interleave_b({Orientation::Vertical, 10, 0}), 2);
    EXPECT_EQ(interleave_b({Orientation::Horizontal, 3, 0}), 1);
    EXPECT_EQ(interleave_b({Orientation::Horizontal, 4, 0}), 3);
}

TEST(Lattice, Level) {
    EXPECT_EQ(level(7, 5), 0);
    EXPECT_EQ(level(10, 5), 1);
    EXPECT_EQ(level(25, 5), 2);
    EXPECT_EQ(level(81, 3), 4);
    EXPECT_THROW(level(0, 5), std::invalid_argument);
    EXPECT_THROW(level(5, 1), std::invalid_argument);
}

TEST(Lattice, ScheduleExamples) {
    ScheduleParams f5(5);
    for (std::int64_t t = 0; t < 64; t++) {
        EXPECT_EQ(edge_active({Orientation::Vertical, 10, 0}, t, f5), t % 16 == 10) << t;
        EXPECT_EQ(edge_active({Orientation::Vertical, 3, 0}, t, f5), t % 4 == 0) << t;
        EXPECT_EQ(edge_active({Orientation::Horizontal, 5, 0}, t, f5), t % 16 == 5) << t;
    }
}

TEST(Lattice, MatchesIncludeFormula) {
    for (int pitch : {3, 5}) {
        ScheduleParams params(pitch);
        for (int e = 1; e <= 200; e++) {
            for (auto o : {Orientation::Horizontal, Orientation::Vertical}) {
                Edge edge{o, e, 0};
                for (std::int64_t t = 0; t < 256; t++)
                    ASSERT_EQ(edge_active(edge, t, params), include_formula(edge, t, pitch)) << e << " " << t;
            }
        }
    }
}

TEST(Lattice, PlainActiveOncePerRound) {
    for (int e = 1; e <= 40; e++) {
        for (auto o : {Orientation::Horizontal, Orientation::Vertical}) {
            Edge edge{o, e, 0};
            for (std::int64_t round = 0; round < 20; round++) {
                int count = 0;
                for (int s = 0; s < 4; s++) count += edge_active(edge, 4 * round + s, ScheduleParams::plain());
                EXPECT_EQ(count, 1);
            }
        }
    }
}

TEST(Lattice, Periodicity) {
    for (int pitch : {3, 5}) {
        for (int hold : {1, 2, 3}) {
            ScheduleParams params(pitch, hold);
            for (int e = 1; e <= 30; e++) {
                for (auto o : {Orientation::Horizontal, Orientation::Vertical}) {
                    Edge edge{o, e, 0};
                    std::int64_t period = line_period(o, e, params);
                    for (std::int64_t t = 0; t < 400; t++)
                        ASSERT_EQ(edge_active(edge, t, params), edge_active(edge, t + period, params));
                }
            }
        }
    }
}

TEST(Lattice, HoldWindow) {
    // Level-1 vertical edge, h = 2: live 2 rounds out of every 8.
    ScheduleParams params(3, 2);
    Edge edge{Orientation::Vertical, 3, 0};
    int live = 0;
    for (std::int64_t t = 0; t < 4 * 8; t++) live += edge_active(edge, t, params);
    EXPECT_EQ(live, 2);
    // The hold window reduces to the unheld one at level 0.
    Edge low{Orientation::Horizontal, 1, 0};
    for (std::int64_t t = 0; t < 64; t++) EXPECT_EQ(edge_active(low, t, params), t % 4 == 1);
}

TEST(Lattice, Monogamy) {
    // Each qubit sits on at most one active edge per layer.
    for (int pitch : {3, 5, 7}) {
        for (int hold : {1, 3}) {
            ScheduleParams params(pitch, hold);
            std::int64_t layers = 4 * (4 * hold) * (4 * hold);
            for (int size = 2; size <= 30; size++) {
                LatticeSpec lat(size, size);
                auto edges = all_edges(lat);
                for (std::int64_t t = 0; t < layers; t++) {
                    std::vector<int> used(lat.num_qubits(), 0);
                    for (const auto &edge : edges) {
                        if (!edge_active(edge, t, params)) continue;
                        auto [a, b] = edge.qubits(lat);
                        ASSERT_EQ(used[a]++, 0) << pitch << " " << hold << " " << t;
                        ASSERT_EQ(used[b]++, 0) << pitch << " " << hold << " " << t;
                    }
                }
            }
        }
    }
}

TEST(Lattice, RectangularMonogamy) {
    LatticeSpec lat(7, 19);
    ScheduleParams params(3);
    auto edges = all_edges(lat);
    for (std::int64_t t = 0; t < 256; t++) {
        std::vector<int> used(lat.num_qubits(), 0);
        for (const auto &edge : edges) {
            if (!edge_active(edge, t, params)) continue;
            auto [a, b] = edge.qubits(lat);
            ASSERT_EQ(used[a]++ + used[b]++, 0);
        }
    }
}

TEST(Lattice, OverflowDetected) {
    ScheduleParams params(3, 1000);
    Edge deep{Orientation::Vertical, 3 * 3 * 3 * 3 * 3 * 3 * 3 * 3, 0};
    EXPECT_THROW(edge_active(deep, 0, params), std::overflow_error);
}

}  // namespace
}  // namespace fractalshor
