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

#ifndef FRACTALSHOR_ANALYSIS_HPP
#define FRACTALSHOR_ANALYSIS_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fractalshor/circuit.hpp"
#include "fractalshor/decoder.hpp"
#include "fractalshor/frame_sim.hpp"

namespace fractalshor {

enum class FaultClass : std::uint8_t { Silent, Corrected, Dangling, Logical };
const char *fault_class_name(FaultClass c);

struct FaultRecord {
    FaultLocation location;
    GateKind kind = GateKind::IDLE;
    std::size_t layer = 0;
    double probability = 0;
    Symptom symptom;
    std::uint64_t truth = 0;
    std::uint64_t prediction = 0;
    FaultClass classification = FaultClass::Silent;
};

struct FaultReport {
    std::vector<FaultRecord> faults;
    /// Faults whose layer is at least this index count as dangling when mis-predicted.
    std::size_t final_round_start = 0;

    std::size_t count(FaultClass c) const;
    /// One JSON object per line.
    void write_jsonl(std::ostream &out) const;
    /// "faults: N" followed by one "<class>: <count>" line per class.
    void write_summary(std::ostream &out) const;
};

/// First layer of the final round, from the circuit's `final_round_start`
/// metadata, or the last 4-layer round before the terminal layer otherwise.
std::size_t final_round_start(const Circuit &circuit);

/// Decodes the symptom of every single fault outcome of every noisy op.
FaultReport enumerate_single_faults(const Circuit &circuit, int threads = 0);

/// Fewest mechanisms whose combined symptom is empty and whose combined
/// observable mask is nonzero. Throws if the graph has no observables or no
/// such set exists.
int fault_distance(const DecodingGraph &graph);

struct SliceEntry {
    std::uint32_t detector;
    Basis basis;
    std::vector<std::uint32_t> qubits;  // ascending
};

struct DetectorSlice {
    std::size_t layer = 0;
    std::vector<SliceEntry> entries;
};

/// Layer interval [begin, end) during which a detector is being accumulated.
/// A detector whose records all come from one layer starts at the circuit
/// start (it compares against the initial reset).
std::pair<std::size_t, std::size_t> detector_span(const Circuit &circuit, std::size_t detector);

/// Supports of the detectors spanning layer t: the product of the qubit
/// supports of the detector's records measured after t.
DetectorSlice detector_slice(const Circuit &circuit, std::size_t t);

/// {"layer": t, "rows": R, "cols": C, "detectors": [{"id", "basis", "qubits", "coords"}]}
std::string slice_json(const Circuit &circuit, const DetectorSlice &slice);

}  // namespace fractalshor

#endif
