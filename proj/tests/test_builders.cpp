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
#include <set>
#include <tuple>
#include <vector>

#include "fractalshor/builders.hpp"
#include "fractalshor/frame_sim.hpp"
#include "fractalshor/tableau.hpp"

namespace fractalshor {
namespace {

Circuit memory(int d, std::optional<int> pitch, Basis basis, int rounds, int hold = 1) {
    MemoryExperimentSpec spec;
    spec.lattice = LatticeSpec::square(d);
    spec.schedule = ScheduleParams(pitch, hold);
    spec.basis = basis;
    spec.rounds = rounds;
    return build_memory(spec);
}

// Under gauge randomization every non-deterministic detector or observable
// fires in about half the shots.
bool frame_deterministic(const Circuit &c, std::size_t shots = 256) {
    SampleOptions opts;
    opts.gauge_randomize = true;
    CompiledCircuit cc(c);
    SyndromeBatch b = sample(cc, shots, 99, opts);
    for (std::size_t s = 0; s < shots; s++) {
        if (!b.fired_detectors(s).empty() || b.observable_mask(s) != 0) return false;
    }
    return true;
}

using Op = std::tuple<GateKind, std::uint32_t, std::uint32_t>;

std::set<Op> layer_ops(const Layer &layer) {
    std::set<Op> out;
    for (const auto &inst : layer.instructions) {
        if (inst.kind == GateKind::IDLE) continue;
        int g = group_size(inst.kind);
        for (std::size_t k = 0; k < inst.targets.size(); k += g)
            out.emplace(inst.kind, inst.targets[k], g == 2 ? inst.targets[k + 1] : inst.targets[k]);
    }
    return out;
}

TEST(Builders, SurgeryGateCounts) {
    Circuit c = build_surgery({});
    EXPECT_EQ(c.count(GateKind::MXX), 215u);
    EXPECT_EQ(c.count(GateKind::MZZ), 200u);
    EXPECT_EQ(c.count(GateKind::IDLE), 170u);
    EXPECT_EQ(c.num_qubits(), 50u);
    EXPECT_TRUE(validate(c).ok);
}

TEST(Builders, SurgeryObservables) {
    EXPECT_EQ(build_surgery({}).num_observables(), 3u);
    SurgeryExperimentSpec z;
    z.basis = Basis::Z;
    EXPECT_EQ(build_surgery(z).num_observables(), 1u);
    SurgeryExperimentSpec two;
    two.blocks = 2;
    EXPECT_EQ(build_surgery(two).num_observables(), 4u);
}

TEST(Builders, MemoryShape) {
    Circuit c = memory(5, std::nullopt, Basis::X, 5);
    EXPECT_EQ(c.layers.size(), 4u * 5 + 2);
    EXPECT_EQ(c.count(GateKind::RX), 25u);
    EXPECT_EQ(c.count(GateKind::MX), 25u);
    EXPECT_EQ(c.count(GateKind::MXX), 5u * 4 * 5);
    EXPECT_EQ(c.count(GateKind::MZZ), 5u * 4 * 5);
    EXPECT_EQ(c.num_observables(), 1u);
    EXPECT_EQ(c.meta.at("final_round_start"), "17");
}

TEST(Builders, LogicalSupport) {
    LatticeSpec lat(3, 4);
    EXPECT_EQ(logical_support(lat, Basis::X, 0), (std::vector<std::uint32_t>{0, 4, 8}));
    EXPECT_EQ(logical_support(lat, Basis::Z, 0), (std::vector<std::uint32_t>{0, 1, 2, 3}));
}

TEST(Builders, DetectorSetsJoinAcrossActivePerpendiculars) {
    LatticeSpec lat(4, 4);
    // Nothing measured in between: every vertical edge of row 2 is its own set.
    auto none = [](const Edge &, std::int64_t) { return false; };
    auto sets = derive_detector_sets(lat, Orientation::Vertical, 2, 0, 4, none);
    EXPECT_EQ(sets.size(), 4u);
    // All horizontal edges active: the whole line collapses to one set.
    auto all = [](const Edge &e, std::int64_t) { return e.orientation == Orientation::Horizontal; };
    sets = derive_detector_sets(lat, Orientation::Vertical, 2, 0, 4, all);
    ASSERT_EQ(sets.size(), 1u);
    EXPECT_EQ(sets[0], (std::vector<int>{0, 1, 2, 3}));
    // Outside the open interval nothing joins.
    auto at_ends = [](const Edge &, std::int64_t t) { return t == 0 || t == 4; };
    EXPECT_EQ(derive_detector_sets(lat, Orientation::Vertical, 2, 0, 4, at_ends).size(), 4u);
}

TEST(Builders, SmallCircuitsDeterministicOnTableau) {
    std::vector<Circuit> circuits;
    for (auto basis : {Basis::X, Basis::Z}) {
        for (int d : {2, 3, 4, 5}) circuits.push_back(memory(d, std::nullopt, basis, d));
        circuits.push_back(memory(3, 3, basis, 6));
        circuits.push_back(memory(5, 3, basis, 8, 2));
    }
    for (const auto &c : circuits) {
        ASSERT_TRUE(validate(c).ok);
        EXPECT_TRUE(tableau_deterministic(CompiledCircuit(c), 4, 5));
        EXPECT_TRUE(frame_deterministic(c));
    }
}

TEST(Builders, SurgeryDeterministic) {
    for (auto basis : {Basis::X, Basis::Z}) {
        for (int blocks : {1, 2}) {
            SurgeryExperimentSpec s;
            s.basis = basis;
            s.blocks = blocks;
            Circuit c = build_surgery(s);
            ASSERT_TRUE(validate(c).ok);
            EXPECT_TRUE(frame_deterministic(c));
        }
    }
    SurgeryExperimentSpec s;
    s.distance = 3;
    EXPECT_TRUE(tableau_deterministic(CompiledCircuit(build_surgery(s)), 4, 3));
}

TEST(Builders, LargeCircuitsDeterministic) {
    for (auto basis : {Basis::X, Basis::Z}) {
        for (auto [d, pitch] : std::vector<std::pair<int, std::optional<int>>>{
                 {9, std::nullopt}, {9, 3}, {15, 5}, {27, 3}}) {
            Circuit c = memory(d, pitch, basis, d);
            ASSERT_TRUE(validate(c).ok);
            EXPECT_TRUE(frame_deterministic(c, 128)) << d;
        }
    }
}

TEST(Builders, FractalIsSubsetOfPlain) {
    for (auto [d, pitch] : std::vector<std::pair<int, int>>{{9, 3}, {10, 5}, {27, 3}}) {
        Circuit plain = memory(d, std::nullopt, Basis::X, 12);
        Circuit fractal = memory(d, pitch, Basis::X, 12);
        ASSERT_EQ(plain.layers.size(), fractal.layers.size());
        for (std::size_t l = 0; l < plain.layers.size(); l++) {
            auto p = layer_ops(plain.layers[l]);
            auto f = layer_ops(fractal.layers[l]);
            EXPECT_TRUE(std::includes(p.begin(), p.end(), f.begin(), f.end())) << d << " layer " << l;
        }
        EXPECT_LT(fractal.count(GateKind::MXX), plain.count(GateKind::MXX));
    }
}

TEST(Builders, IdlesPadEveryLayer) {
    Circuit c = memory(9, 3, Basis::Z, 9);
    for (std::size_t l = 0; l < c.layers.size(); l++) {
        std::vector<int> touched(c.num_qubits(), 0);
        for (const auto &inst : c.layers[l].instructions)
            for (auto q : inst.targets) touched[q]++;
        for (int t : touched) EXPECT_EQ(t, 1) << "layer " << l;
    }
}

TEST(Builders, RejectsBadSpecs) {
    MemoryExperimentSpec spec;
    spec.lattice = LatticeSpec::square(5);
    spec.rounds = 1;
    EXPECT_THROW(build_memory(spec), std::invalid_argument);
    SurgeryExperimentSpec s;
    s.rounds_during = 0;
    EXPECT_THROW(build_surgery(s), std::invalid_argument);
}

}  // namespace
}  // namespace fractalshor
