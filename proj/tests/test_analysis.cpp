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
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>

#include "fractalshor/analysis.hpp"
#include "fractalshor/builders.hpp"
#include "fractalshor/noise.hpp"

namespace fractalshor {
namespace {

Circuit memory(int d, std::optional<int> pitch, Basis basis, int rounds) {
    MemoryExperimentSpec spec;
    spec.lattice = LatticeSpec::square(d);
    spec.schedule = ScheduleParams(pitch);
    spec.basis = basis;
    spec.rounds = rounds;
    return build_memory(spec);
}

void check_classes(const FaultReport &r) {
    for (const auto &f : r.faults) {
        FaultClass want;
        if (f.prediction == f.truth) {
            want = f.symptom.detectors.empty() && f.truth == 0 ? FaultClass::Silent : FaultClass::Corrected;
        } else {
            want = f.layer >= r.final_round_start ? FaultClass::Dangling : FaultClass::Logical;
        }
        ASSERT_EQ(f.classification, want);
        std::uint64_t truth = 0;
        for (auto o : f.symptom.observables) truth |= std::uint64_t{1} << o;
        ASSERT_EQ(truth, f.truth);
    }
    std::size_t total = 0;
    for (auto c : {FaultClass::Silent, FaultClass::Corrected, FaultClass::Dangling, FaultClass::Logical})
        total += r.count(c);
    EXPECT_EQ(total, r.faults.size());
}

TEST(Analysis, SurgeryEnumeration) {
    for (auto basis : {Basis::X, Basis::Z}) {
        SurgeryExperimentSpec s;
        s.basis = basis;
        Circuit c = apply_noise(build_surgery(s), NoiseModel(0.001));
        FaultReport r = enumerate_single_faults(c);
        // 415 pair measurements (15 Paulis + 1 flip), 170 idles, then the
        // transversal reset (1) and measurement (1 flip + 3 Paulis) on 50 qubits.
        EXPECT_EQ(r.faults.size(), 415u * 16 + 170 * 3 + 50 + 50 * 4);
        EXPECT_EQ(r.count(FaultClass::Logical), 0u);
        EXPECT_EQ(r.final_round_start, 17u);
        check_classes(r);
    }
}

TEST(Analysis, DistanceThreeIsNotEnough) {
    for (auto basis : {Basis::X, Basis::Z}) {
        FaultReport r = enumerate_single_faults(apply_noise(memory(3, std::nullopt, basis, 3), NoiseModel(0.001)));
        EXPECT_GE(r.count(FaultClass::Logical), 1u);
        check_classes(r);
    }
}

TEST(Analysis, DistanceFiveMemoryCorrectsEverything) {
    FaultReport r = enumerate_single_faults(apply_noise(memory(5, std::nullopt, Basis::X, 5), NoiseModel(0.001)));
    EXPECT_EQ(r.count(FaultClass::Logical), 0u);
    EXPECT_EQ(r.count(FaultClass::Dangling), 0u);
}

TEST(Analysis, NextBlockCorrectsTheLastRound) {
    SurgeryExperimentSpec one;
    SurgeryExperimentSpec two;
    two.blocks = 2;
    FaultReport a = enumerate_single_faults(apply_noise(build_surgery(one), NoiseModel(0.001)));
    FaultReport b = enumerate_single_faults(apply_noise(build_surgery(two), NoiseModel(0.001)));
    EXPECT_EQ(b.count(FaultClass::Logical), 0u);
    // Faults in the first block's final round are handled by the second block.
    std::size_t in_window = 0;
    for (const auto &f : b.faults) {
        if (f.layer < a.final_round_start || f.layer >= a.final_round_start + 4) continue;
        in_window++;
        EXPECT_EQ(f.prediction, f.truth) << f.layer;
    }
    EXPECT_GT(in_window, 1000u);
    EXPECT_EQ(b.final_round_start, a.final_round_start + 20);
}

TEST(Analysis, FinalRoundStartFallback) {
    Circuit c = memory(3, std::nullopt, Basis::X, 3);
    EXPECT_EQ(final_round_start(c), 9u);
    c.meta.erase("final_round_start");
    EXPECT_EQ(final_round_start(c), c.layers.size() - 5);
}

TEST(Analysis, ReportFormats) {
    FaultReport r = enumerate_single_faults(apply_noise(memory(3, std::nullopt, Basis::Z, 3), NoiseModel(0.001)));
    std::ostringstream lines;
    r.write_jsonl(lines);
    std::istringstream in(lines.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        const auto &f = r.faults[n++];
        EXPECT_EQ(j.at("instruction"), f.location.instruction);
        EXPECT_EQ(j.at("layer"), f.layer);
        EXPECT_EQ(j.at("class"), fault_class_name(f.classification));
        EXPECT_EQ(j.at("detectors").get<std::vector<std::uint32_t>>(), f.symptom.detectors);
    }
    EXPECT_EQ(n, r.faults.size());
    std::ostringstream summary;
    r.write_summary(summary);
    std::ostringstream want;
    want << "faults: " << r.faults.size() << "\nsilent: " << r.count(FaultClass::Silent)
         << "\ncorrected: " << r.count(FaultClass::Corrected) << "\ndangling: " << r.count(FaultClass::Dangling)
         << "\nlogical: " << r.count(FaultClass::Logical) << "\n";
    EXPECT_EQ(summary.str(), want.str());
}

TEST(Analysis, EnumerationIgnoresThreadCount) {
    Circuit c = apply_noise(memory(3, 3, Basis::X, 4), NoiseModel(0.001));
    FaultReport a = enumerate_single_faults(c, 1);
    FaultReport b = enumerate_single_faults(c, 3);
    ASSERT_EQ(a.faults.size(), b.faults.size());
    for (std::size_t k = 0; k < a.faults.size(); k++) {
        EXPECT_EQ(a.faults[k].location, b.faults[k].location);
        EXPECT_EQ(a.faults[k].prediction, b.faults[k].prediction);
    }
}

// Smallest edge subset with even degree at every detector and a nonzero mask.
int subset_distance(const DecodingGraph &g) {
    const auto &edges = g.edges();
    int best = INT32_MAX;
    for (std::uint64_t s = 1; s < (std::uint64_t{1} << edges.size()); s++) {
        std::vector<int> degree(g.num_nodes(), 0);
        std::uint64_t mask = 0;
        for (std::size_t k = 0; k < edges.size(); k++) {
            if (!((s >> k) & 1)) continue;
            degree[edges[k].u] ^= 1;
            degree[edges[k].v] ^= 1;
            mask ^= edges[k].observables;
        }
        bool even = true;
        for (std::uint32_t v = 0; v < g.num_detectors(); v++) even &= degree[v] == 0;
        if (even && mask) best = std::min(best, __builtin_popcountll(s));
    }
    return best;
}

TEST(Analysis, FaultDistanceAgainstSubsets) {
    std::mt19937_64 rng(31);
    int checked = 0;
    for (int trial = 0; trial < 300; trial++) {
        std::uint32_t d = 2 + trial % 6;
        DecodingGraph g(d, 2);
        for (int k = 0; k < 11; k++) {
            std::uint32_t u = rng() % d;
            std::uint32_t v = rng() % (d + 1);
            if (v == u) continue;
            if (v == d) v = g.boundary(Basis::X);
            g.add_edge(u, v, 0.01, rng() % 4 == 0 ? rng() % 4 : 0, Basis::X);
        }
        if (rng() % 5 == 0) g.add_edge(g.boundary(Basis::X), g.boundary(Basis::X), 0.01, 2, Basis::X);
        int want = subset_distance(g);
        if (want == INT32_MAX) {
            bool has_obs = false;
            for (const auto &e : g.edges()) has_obs |= e.observables != 0;
            if (has_obs) {
                EXPECT_THROW(fault_distance(g), std::runtime_error);
            }
            continue;
        }
        ASSERT_EQ(fault_distance(g), want) << trial;
        checked++;
    }
    EXPECT_GT(checked, 100);
}

TEST(Analysis, FaultDistanceOfMemoryCircuits) {
    // A pair-measurement fault can cover two columns at once, so the
    // circuit distance is (d + 1) / 2.
    for (int d : {3, 5, 7}) {
        for (auto basis : {Basis::X, Basis::Z}) {
            CompiledCircuit c(apply_noise(memory(d, std::nullopt, basis, d), NoiseModel(0.001)));
            EXPECT_EQ(fault_distance(build_graph(c)), (d + 1) / 2) << d;
        }
    }
    EXPECT_THROW(fault_distance(DecodingGraph(3, 0)), std::invalid_argument);
}

// Qubits touched by the records of a detector measured after layer t.
std::set<std::uint32_t> slice_oracle(const Circuit &c, std::size_t det, std::size_t t) {
    auto src = c.record_sources();
    std::set<std::uint32_t> out;
    for (auto r : c.detectors[det].records) {
        const auto &s = src[r];
        if (s.layer <= t) continue;
        const auto &inst = c.layers[s.layer].instructions[s.instruction];
        int g = group_size(inst.kind);
        for (int k = 0; k < g; k++) {
            auto q = inst.targets[s.group * g + k];
            if (!out.erase(q)) out.insert(q);
        }
    }
    return out;
}

TEST(Analysis, DetectorSlices) {
    for (auto [d, pitch] : std::vector<std::pair<int, std::optional<int>>>{{4, std::nullopt}, {9, 3}}) {
        Circuit c = memory(d, pitch, Basis::X, 6);
        for (std::size_t t = 0; t < c.layers.size(); t++) {
            DetectorSlice slice = detector_slice(c, t);
            EXPECT_EQ(slice.layer, t);
            std::set<std::uint32_t> listed;
            for (const auto &e : slice.entries) {
                listed.insert(e.detector);
                auto [begin, end] = detector_span(c, e.detector);
                EXPECT_LE(begin, t);
                EXPECT_LT(t, end);
                auto want = slice_oracle(c, e.detector, t);
                EXPECT_EQ(std::set<std::uint32_t>(e.qubits.begin(), e.qubits.end()), want);
                EXPECT_TRUE(std::is_sorted(e.qubits.begin(), e.qubits.end()));
                EXPECT_EQ(e.basis, c.detectors[e.detector].coords.basis);
            }
            for (std::size_t k = 0; k < c.detectors.size(); k++) {
                auto [begin, end] = detector_span(c, k);
                EXPECT_EQ(listed.count(k) == 1, begin <= t && t < end) << k << " at " << t;
            }
        }
        EXPECT_THROW(detector_slice(c, c.layers.size()), std::out_of_range);
    }
}

TEST(Analysis, SliceJson) {
    Circuit c = memory(4, std::nullopt, Basis::Z, 4);
    auto slice = detector_slice(c, 6);
    auto j = nlohmann::json::parse(slice_json(c, slice));
    EXPECT_EQ(j.at("layer"), 6);
    EXPECT_EQ(j.at("rows"), 4);
    EXPECT_EQ(j.at("cols"), 4);
    ASSERT_EQ(j.at("detectors").size(), slice.entries.size());
    ASSERT_FALSE(slice.entries.empty());
    const auto &first = j.at("detectors")[0];
    EXPECT_EQ(first.at("id"), slice.entries[0].detector);
    EXPECT_EQ(first.at("qubits").get<std::vector<std::uint32_t>>(), slice.entries[0].qubits);
    EXPECT_TRUE(first.at("basis") == "X" || first.at("basis") == "Z");
    EXPECT_EQ(first.at("coords").size(), slice.entries[0].qubits.size());
}

}  // namespace
}  // namespace fractalshor
