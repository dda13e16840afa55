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

#include <string>

#include "fractalshor/builders.hpp"
#include "fractalshor/circuit.hpp"
#include "fractalshor/noise.hpp"

namespace fractalshor {
namespace {

const char *kSmall = R"(# meta note=hand written
QUBIT(0,0) 0
QUBIT(0,1) 1
RX 0 1
TICK
MXX(0.01) 0 1
DEP2(0.01) 0 1
DETECTOR(0,0,1,X) rec[-1]
TICK
MXX 0 1
DETECTOR(0,0,2,X) rec[-1] rec[-2]
TICK
MX 0 1
DETECTOR(0,0,3,X) rec[-3] rec[-2] rec[-1]
OBSERVABLE(0) rec[-2]
)";

TEST(Circuit, ParseSmall) {
    Circuit c = Circuit::parse(kSmall);
    EXPECT_EQ(c.layers.size(), 4u);
    EXPECT_EQ(c.num_qubits(), 2u);
    EXPECT_EQ(c.num_measurements(), 4u);
    EXPECT_EQ(c.num_detectors(), 3u);
    EXPECT_EQ(c.num_observables(), 1u);
    EXPECT_EQ(c.meta.at("note"), "hand written");
    EXPECT_EQ(c.count(GateKind::MXX), 2u);
    EXPECT_EQ(c.count(GateKind::MX), 2u);
    EXPECT_TRUE(c.has_noise());
    ASSERT_EQ(c.layers[1].instructions.size(), 2u);
    EXPECT_EQ(c.layers[1].instructions[0].probability, 0.01);
    EXPECT_FALSE(c.layers[2].instructions[0].probability.has_value());
}

TEST(Circuit, LookbackToAbsolute) {
    Circuit c = Circuit::parse(kSmall);
    EXPECT_EQ(c.detectors[0].records, (std::vector<std::int64_t>{0}));
    EXPECT_EQ(c.detectors[1].records, (std::vector<std::int64_t>{1, 0}));
    EXPECT_EQ(c.detectors[2].records, (std::vector<std::int64_t>{1, 2, 3}));
    EXPECT_EQ(c.observables[0].records, (std::vector<std::int64_t>{2}));
    EXPECT_EQ(c.detectors[2].layer, 3u);
    auto src = c.record_sources();
    ASSERT_EQ(src.size(), 4u);
    EXPECT_EQ(src[3].layer, 3u);
    EXPECT_EQ(src[3].group, 1u);
    EXPECT_EQ(c.measurements_through_layer(), (std::vector<std::size_t>{0, 1, 2, 4}));
}

TEST(Circuit, RoundTripSmall) {
    Circuit c = Circuit::parse(kSmall);
    EXPECT_EQ(Circuit::parse(c.serialize()), c);
    EXPECT_EQ(Circuit::parse(c.serialize()).serialize(), c.serialize());
}

TEST(Circuit, RoundTripBuilt) {
    for (auto basis : {Basis::X, Basis::Z}) {
        for (int pitch : {0, 3}) {
            MemoryExperimentSpec spec;
            spec.lattice = LatticeSpec::square(pitch ? 9 : 4);
            if (pitch) spec.schedule = ScheduleParams(pitch);
            spec.basis = basis;
            spec.rounds = 5;
            Circuit c = build_memory(spec);
            EXPECT_EQ(Circuit::parse(c.serialize()), c);
            Circuit noisy = apply_noise(c, NoiseModel(0.00123));
            EXPECT_EQ(Circuit::parse(noisy.serialize()), noisy);
        }
        SurgeryExperimentSpec s;
        s.basis = basis;
        Circuit c = build_surgery(s);
        EXPECT_EQ(Circuit::parse(c.serialize()), c);
    }
}

TEST(Circuit, ObservableMerge) {
    Circuit c = Circuit::parse(
        "RZ 0\nTICK\nMZ 0\nOBSERVABLE(1) rec[-1]\nTICK\nMZ 0\nOBSERVABLE(1) rec[-2] rec[-1]\n");
    auto merged = c.observable_records();
    ASSERT_EQ(merged.size(), 2u);
    EXPECT_TRUE(merged[0].empty());
    EXPECT_EQ(merged[1], (std::vector<std::int64_t>{1}));
}

TEST(Circuit, ParseErrors) {
    auto line_of = [](const std::string &text) -> std::size_t {
        try {
            Circuit::parse(text);
        } catch (const ParseError &e) {
            return e.line;
        }
        return 0;
    };
    EXPECT_EQ(line_of("RX 0\nFOO 1\n"), 2u);
    EXPECT_EQ(line_of("RX 0\nTICK\nMXX 0\n"), 3u);
    EXPECT_EQ(line_of("MX 0\nDETECTOR(0,0,0,X) rec[0]\n"), 2u);
    EXPECT_EQ(line_of("DEP1 0\n"), 1u);
    EXPECT_EQ(line_of("MX(1.5) 0\n"), 1u);
    EXPECT_EQ(line_of("RX(0.1) 0\n"), 1u);
    EXPECT_EQ(line_of("TICK 3\n"), 1u);
}

TEST(Circuit, ValidationCatchesReuse) {
    Circuit c = Circuit::parse("RX 0 1 2\nTICK\nMXX 0 1\nMZZ 1 2\n");
    auto report = validate(c);
    EXPECT_FALSE(report.ok);
    EXPECT_EQ(report.layer, 1u);
    EXPECT_EQ(report.qubit, 1u);
    EXPECT_THROW(require_valid(c), ValidationError);
}

TEST(Circuit, ValidationCatchesSelfPair) {
    auto report = validate(Circuit::parse("RX 0 1\nTICK\nMXX 1 1\n"));
    EXPECT_FALSE(report.ok);
    EXPECT_EQ(report.qubit, 1u);
}

TEST(Circuit, ValidationAcceptsNoiseOnSameQubits) {
    EXPECT_TRUE(validate(Circuit::parse(kSmall)).ok);
}

TEST(Circuit, ValidationCatchesDanglingRecord) {
    Circuit c = Circuit::parse(kSmall);
    c.detectors[0].records = {7};
    EXPECT_FALSE(validate(c).ok);
}

TEST(Circuit, GateNames) {
    for (auto k : {GateKind::RX, GateKind::RZ, GateKind::MX, GateKind::MZ, GateKind::MXX, GateKind::MZZ,
                   GateKind::IDLE, GateKind::XERR, GateKind::ZERR, GateKind::DEP1, GateKind::DEP2})
        EXPECT_EQ(gate_from_name(gate_name(k)), k);
    EXPECT_FALSE(gate_from_name("CX").has_value());
    EXPECT_EQ(group_size(GateKind::DEP2), 2);
    EXPECT_EQ(gate_basis(GateKind::MZZ), Basis::Z);
}

}  // namespace
}  // namespace fractalshor
