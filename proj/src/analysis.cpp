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

#include "fractalshor/analysis.hpp"

#include <omp.h>

#include <algorithm>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace fractalshor {

const char *fault_class_name(FaultClass c) {
    switch (c) {
        case FaultClass::Silent:
            return "silent";
        case FaultClass::Corrected:
            return "corrected";
        case FaultClass::Dangling:
            return "dangling";
        case FaultClass::Logical:
            return "logical";
    }
    return "?";
}

std::size_t FaultReport::count(FaultClass c) const {
    return static_cast<std::size_t>(
        std::count_if(faults.begin(), faults.end(), [c](const FaultRecord &f) { return f.classification == c; }));
}

namespace {

std::vector<int> mask_bits(std::uint64_t mask) {
    std::vector<int> out;
    for (int k = 0; k < 64; k++) {
        if ((mask >> k) & 1) out.push_back(k);
    }
    return out;
}

}  // namespace

void FaultReport::write_jsonl(std::ostream &out) const {
    for (const auto &f : faults) {
        nlohmann::ordered_json j;
        j["instruction"] = f.location.instruction;
        j["group"] = f.location.group;
        j["outcome"] = f.location.outcome;
        j["gate"] = gate_name(f.kind);
        j["layer"] = f.layer;
        j["probability"] = f.probability;
        j["detectors"] = f.symptom.detectors;
        j["observables"] = f.symptom.observables;
        j["prediction"] = mask_bits(f.prediction);
        j["class"] = fault_class_name(f.classification);
        out << j.dump() << "\n";
    }
}

void FaultReport::write_summary(std::ostream &out) const {
    out << "faults: " << faults.size() << "\n";
    for (auto c : {FaultClass::Silent, FaultClass::Corrected, FaultClass::Dangling, FaultClass::Logical}) {
        out << fault_class_name(c) << ": " << count(c) << "\n";
    }
}

std::size_t final_round_start(const Circuit &circuit) {
    auto it = circuit.meta.find("final_round_start");
    if (it != circuit.meta.end()) {
        return static_cast<std::size_t>(std::stoull(it->second));
    }
    std::size_t n = circuit.layers.size();
    return n >= 5 ? n - 5 : 0;
}

FaultReport enumerate_single_faults(const Circuit &circuit, int threads) {
    CompiledCircuit cc(circuit);
    FaultReport report;
    report.final_round_start = final_round_start(circuit);
    for_each_fault(cc, [&](const FaultLocation &loc, double p, const Symptom &s) {
        FaultRecord r;
        r.location = loc;
        r.kind = cc.ops[loc.instruction].kind;
        r.layer = cc.ops[loc.instruction].layer;
        r.probability = p;
        r.symptom = s;
        for (auto o : s.observables) r.truth |= std::uint64_t{1} << o;
        report.faults.push_back(std::move(r));
    });
    // Visited in reverse; present in circuit order.
    std::reverse(report.faults.begin(), report.faults.end());
    if (report.faults.empty()) return report;

    DecodingGraph graph = build_graph(cc);
    const auto n = static_cast<std::int64_t>(report.faults.size());
    int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(nthreads)
    for (std::int64_t i = 0; i < n; i++) {
        auto &f = report.faults[i];
        f.prediction = decode_shot(graph, f.symptom.detectors).prediction;
        if (f.prediction == f.truth) {
            f.classification = f.symptom.empty() ? FaultClass::Silent : FaultClass::Corrected;
        } else {
            f.classification = f.layer >= report.final_round_start ? FaultClass::Dangling : FaultClass::Logical;
        }
    }
    return report;
}

int fault_distance(const DecodingGraph &graph) {
    if (graph.num_observables() == 0) {
        throw std::invalid_argument("fault_distance: graph has no observables");
    }
    const std::uint32_t n = graph.num_nodes();
    const auto &edges = graph.edges();
    int best = std::numeric_limits<int>::max();
    std::vector<int> dist(2 * n);
    std::deque<std::uint32_t> queue;
    for (std::uint32_t k = 0; k < graph.num_observables(); k++) {
        bool any = false;
        for (const auto &e : edges) any |= ((e.observables >> k) & 1) != 0;
        if (!any) continue;
        // Shortest closed walk with odd parity of bit k; it contains a
        // simple cycle of no greater length with the same property.
        for (std::uint32_t s = 0; s < n; s++) {
            if (graph.incident(s).empty()) continue;
            std::fill(dist.begin(), dist.end(), -1);
            queue.clear();
            dist[2 * s] = 0;
            queue.push_back(2 * s);
            while (!queue.empty()) {
                std::uint32_t state = queue.front();
                queue.pop_front();
                if (dist[state] + 1 >= best) break;
                std::uint32_t x = state / 2;
                std::uint32_t par = state % 2;
                for (auto ei : graph.incident(x)) {
                    const auto &e = edges[ei];
                    std::uint32_t y = e.u == x ? e.v : e.u;
                    std::uint32_t next = 2 * y + (par ^ ((e.observables >> k) & 1));
                    if (dist[next] < 0) {
                        dist[next] = dist[state] + 1;
                        queue.push_back(next);
                    }
                }
            }
            if (dist[2 * s + 1] > 0) best = std::min(best, dist[2 * s + 1]);
        }
    }
    if (best == std::numeric_limits<int>::max()) {
        throw std::runtime_error("fault_distance: no undetectable logical error exists");
    }
    return best;
}

std::pair<std::size_t, std::size_t> detector_span(const Circuit &circuit, std::size_t detector) {
    if (detector >= circuit.detectors.size()) throw std::out_of_range("detector out of range");
    auto sources = circuit.record_sources();
    const auto &d = circuit.detectors[detector];
    if (d.records.empty()) return {0, 0};
    std::size_t lo = std::numeric_limits<std::size_t>::max();
    std::size_t hi = 0;
    for (auto r : d.records) {
        lo = std::min(lo, sources[r].layer);
        hi = std::max(hi, sources[r].layer);
    }
    return lo == hi ? std::pair<std::size_t, std::size_t>{0, hi} : std::pair<std::size_t, std::size_t>{lo, hi};
}

DetectorSlice detector_slice(const Circuit &circuit, std::size_t t) {
    if (t >= circuit.layers.size()) {
        throw std::out_of_range("slice layer " + std::to_string(t) + " outside the circuit");
    }
    auto sources = circuit.record_sources();
    DetectorSlice slice;
    slice.layer = t;
    std::vector<std::uint8_t> parity(circuit.num_qubits(), 0);
    for (std::size_t di = 0; di < circuit.detectors.size(); di++) {
        const auto &d = circuit.detectors[di];
        if (d.records.empty()) continue;
        std::size_t lo = std::numeric_limits<std::size_t>::max();
        std::size_t hi = 0;
        for (auto r : d.records) {
            lo = std::min(lo, sources[r].layer);
            hi = std::max(hi, sources[r].layer);
        }
        if (lo == hi) lo = 0;
        if (t < lo || t >= hi) continue;
        std::fill(parity.begin(), parity.end(), 0);
        for (auto r : d.records) {
            const auto &src = sources[r];
            if (src.layer <= t) continue;
            const auto &ins = circuit.layers[src.layer].instructions[src.instruction];
            std::size_t gs = group_size(ins.kind);
            for (std::size_t q = 0; q < gs; q++) parity[ins.targets[src.group * gs + q]] ^= 1;
        }
        SliceEntry entry{static_cast<std::uint32_t>(di), d.coords.basis, {}};
        for (std::uint32_t q = 0; q < parity.size(); q++) {
            if (parity[q]) entry.qubits.push_back(q);
        }
        slice.entries.push_back(std::move(entry));
    }
    return slice;
}

std::string slice_json(const Circuit &circuit, const DetectorSlice &slice) {
    std::vector<std::pair<int, int>> coord(circuit.num_qubits(), {0, 0});
    int rows = 0;
    int cols = 0;
    for (const auto &qc : circuit.qubit_coords) {
        coord[qc.qubit] = {qc.row, qc.col};
        rows = std::max(rows, qc.row + 1);
        cols = std::max(cols, qc.col + 1);
    }
    nlohmann::ordered_json j;
    j["layer"] = slice.layer;
    j["rows"] = rows;
    j["cols"] = cols;
    j["detectors"] = nlohmann::ordered_json::array();
    for (const auto &e : slice.entries) {
        nlohmann::ordered_json d;
        d["id"] = e.detector;
        d["basis"] = std::string(1, basis_char(e.basis));
        d["qubits"] = e.qubits;
        auto coords = nlohmann::ordered_json::array();
        for (auto q : e.qubits) coords.push_back({coord[q].first, coord[q].second});
        d["coords"] = coords;
        j["detectors"].push_back(d);
    }
    return j.dump() + "\n";
}

}  // namespace fractalshor
