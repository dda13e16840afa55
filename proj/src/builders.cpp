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

#include "fractalshor/builders.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "fractalshor/disjoint_set.hpp"

namespace fractalshor {

namespace {

struct LineKey {
    Orientation orientation;
    int index;
    auto operator<=>(const LineKey &) const = default;
};

struct LineHistory {
    /// Schedule time of the last measurement, -1 for the transversal reset.
    std::int64_t t = -1;
    /// Record index per position; empty for the virtual reset round.
    std::vector<std::int64_t> records;
};

struct EdgeRecord {
    Edge edge;
    std::int64_t t;
    std::int64_t record;
};

struct Built {
    Circuit circuit;
    std::vector<std::int64_t> final_records;  // per qubit
    std::vector<EdgeRecord> edge_records;
};

int line_count(const LatticeSpec &lattice, Orientation o) {
    return o == Orientation::Horizontal ? lattice.cols - 1 : lattice.rows - 1;
}

int line_length(const LatticeSpec &lattice, Orientation o) {
    return o == Orientation::Horizontal ? lattice.rows : lattice.cols;
}

Orientation same_basis_orientation(Basis basis) {
    return basis == Basis::X ? Orientation::Horizontal : Orientation::Vertical;
}

Basis orientation_basis(Orientation o) { return o == Orientation::Horizontal ? Basis::X : Basis::Z; }

DetectorCoords detector_coords(Orientation o, int index, int first_position, std::int64_t layer) {
    DetectorCoords c;
    c.t = static_cast<int>(layer);
    c.basis = orientation_basis(o);
    if (o == Orientation::Horizontal) {
        c.x = index;
        c.y = first_position;
    } else {
        c.x = first_position;
        c.y = index;
    }
    return c;
}

Built build_impl(const LatticeSpec &lattice, const EdgeSchedule &schedule, Basis basis, int rounds) {
    if (rounds < 1) {
        throw std::invalid_argument("need at least one round");
    }
    Built out;
    Circuit &c = out.circuit;
    const auto n = static_cast<std::uint32_t>(lattice.num_qubits());
    for (int r = 0; r < lattice.rows; r++) {
        for (int col = 0; col < lattice.cols; col++) {
            c.qubit_coords.push_back({static_cast<std::uint32_t>(lattice.qubit(r, col)), r, col});
        }
    }
    std::vector<std::uint32_t> all(n);
    for (std::uint32_t q = 0; q < n; q++) {
        all[q] = q;
    }

    std::int64_t measured = 0;
    c.layers.push_back({{Instruction{basis == Basis::X ? GateKind::RX : GateKind::RZ, all, std::nullopt}}});

    std::map<LineKey, LineHistory> history;
    const Orientation same = same_basis_orientation(basis);
    for (int e = 1; e <= line_count(lattice, same); e++) {
        history[{same, e}] = LineHistory{};
    }

    const std::int64_t total_t = 4 * static_cast<std::int64_t>(rounds);
    for (std::int64_t t = 0; t < total_t; t++) {
        const std::size_t layer = c.layers.size();
        Layer lay;
        std::vector<char> busy(n, 0);
        std::vector<LineKey> measured_lines;
        std::map<LineKey, std::vector<std::int64_t>> line_records;
        // ZZ then XX, so records come in that order within the layer.
        for (Orientation o : {Orientation::Vertical, Orientation::Horizontal}) {
            Instruction inst{o == Orientation::Vertical ? GateKind::MZZ : GateKind::MXX, {}, std::nullopt};
            for (int e = 1; e <= line_count(lattice, o); e++) {
                int active = 0;
                const int len = line_length(lattice, o);
                std::vector<std::int64_t> recs(len, -1);
                for (int pos = 0; pos < len; pos++) {
                    Edge edge{o, e, pos};
                    if (!schedule(edge, t)) {
                        continue;
                    }
                    auto [a, b] = edge.qubits(lattice);
                    if (busy[a] || busy[b]) {
                        throw std::logic_error(
                            "schedule puts qubit in two pair measurements at layer " + std::to_string(layer));
                    }
                    busy[a] = busy[b] = 1;
                    inst.targets.push_back(static_cast<std::uint32_t>(a));
                    inst.targets.push_back(static_cast<std::uint32_t>(b));
                    recs[pos] = measured++;
                    out.edge_records.push_back({edge, t, recs[pos]});
                    active++;
                }
                if (active == 0) {
                    continue;
                }
                if (active != len) {
                    throw std::logic_error("schedule activates part of an edge line");
                }
                measured_lines.push_back({o, e});
                line_records[{o, e}] = std::move(recs);
            }
            if (!inst.targets.empty()) {
                lay.instructions.push_back(std::move(inst));
            }
        }
        Instruction idle{GateKind::IDLE, {}, std::nullopt};
        for (std::uint32_t q = 0; q < n; q++) {
            if (!busy[q]) {
                idle.targets.push_back(q);
            }
        }
        if (!idle.targets.empty()) {
            lay.instructions.push_back(std::move(idle));
        }
        c.layers.push_back(std::move(lay));

        for (const auto &key : measured_lines) {
            const auto &cur = line_records[key];
            auto it = history.find(key);
            if (it != history.end()) {
                const LineHistory &prev = it->second;
                for (const auto &set : derive_detector_sets(lattice, key.orientation, key.index, prev.t, t, schedule)) {
                    Detector d;
                    for (int pos : set) {
                        d.records.push_back(cur[pos]);
                        if (!prev.records.empty()) {
                            d.records.push_back(prev.records[pos]);
                        }
                    }
                    std::sort(d.records.begin(), d.records.end());
                    d.coords = detector_coords(key.orientation, key.index, set.front(), static_cast<std::int64_t>(layer));
                    d.layer = layer;
                    c.detectors.push_back(std::move(d));
                }
            }
            history[key] = LineHistory{t, cur};
        }
    }

    // Transversal measurement doubles as a virtual final round of same-basis edges.
    const std::size_t final_layer = c.layers.size();
    c.layers.push_back({{Instruction{basis == Basis::X ? GateKind::MX : GateKind::MZ, all, std::nullopt}}});
    out.final_records.resize(n);
    for (std::uint32_t q = 0; q < n; q++) {
        out.final_records[q] = measured++;
    }
    for (int e = 1; e <= line_count(lattice, same); e++) {
        const LineHistory &prev = history[{same, e}];
        for (const auto &set : derive_detector_sets(lattice, same, e, prev.t, total_t, schedule)) {
            Detector d;
            for (int pos : set) {
                auto [a, b] = Edge{same, e, pos}.qubits(lattice);
                d.records.push_back(out.final_records[a]);
                d.records.push_back(out.final_records[b]);
                if (!prev.records.empty()) {
                    d.records.push_back(prev.records[pos]);
                }
            }
            std::sort(d.records.begin(), d.records.end());
            d.coords = detector_coords(same, e, set.front(), static_cast<std::int64_t>(final_layer));
            d.layer = final_layer;
            c.detectors.push_back(std::move(d));
        }
    }
    return out;
}

ObservableInclude observable_from(std::uint32_t id, std::vector<std::int64_t> records, std::size_t layer) {
    std::sort(records.begin(), records.end());
    return ObservableInclude{id, std::move(records), layer};
}

}  // namespace

std::vector<std::vector<int>> derive_detector_sets(
    const LatticeSpec &lattice,
    Orientation orientation,
    int index,
    std::int64_t prev_t,
    std::int64_t cur_t,
    const EdgeSchedule &schedule) {
    const int len = line_length(lattice, orientation);
    const Orientation perp =
        orientation == Orientation::Horizontal ? Orientation::Vertical : Orientation::Horizontal;
    DisjointSet sets(static_cast<std::size_t>(len));
    // Perpendicular edges touching this line sit at positions index-1 and index.
    for (int e = 1; e <= line_count(lattice, perp); e++) {
        bool joined = false;
        for (int pos : {index - 1, index}) {
            for (std::int64_t t = std::max<std::int64_t>(prev_t + 1, 0); t < cur_t && !joined; t++) {
                if (schedule(Edge{perp, e, pos}, t)) {
                    joined = true;
                }
            }
        }
        if (joined) {
            sets.unite(static_cast<std::size_t>(e - 1), static_cast<std::size_t>(e));
        }
    }
    std::vector<std::vector<int>> out;
    for (const auto &g : sets.groups()) {
        out.emplace_back(g.begin(), g.end());
    }
    return out;
}

Circuit build_scheduled(const LatticeSpec &lattice, const EdgeSchedule &schedule, Basis basis, int rounds) {
    return build_impl(lattice, schedule, basis, rounds).circuit;
}

std::vector<std::uint32_t> logical_support(const LatticeSpec &lattice, Basis basis, int line) {
    std::vector<std::uint32_t> out;
    if (basis == Basis::X) {
        for (int r = 0; r < lattice.rows; r++) {
            out.push_back(static_cast<std::uint32_t>(lattice.qubit(r, line)));
        }
    } else {
        for (int c = 0; c < lattice.cols; c++) {
            out.push_back(static_cast<std::uint32_t>(lattice.qubit(line, c)));
        }
    }
    return out;
}

Circuit build_memory(const MemoryExperimentSpec &spec) {
    if (spec.lattice.rows < 2 || spec.lattice.cols < 2) {
        throw std::invalid_argument("memory lattice must be at least 2x2");
    }
    if (spec.rounds < 2) {
        throw std::invalid_argument("memory experiment needs at least 2 rounds");
    }
    ScheduleParams params = spec.schedule;
    EdgeSchedule schedule = [params](const Edge &edge, std::int64_t t) { return edge_active(edge, t, params); };
    Built b = build_impl(spec.lattice, schedule, spec.basis, spec.rounds);
    Circuit &c = b.circuit;
    std::vector<std::int64_t> recs;
    for (auto q : logical_support(spec.lattice, spec.basis, 0)) {
        recs.push_back(b.final_records[q]);
    }
    c.observables.push_back(observable_from(0, std::move(recs), c.layers.size() - 1));

    c.meta["experiment"] = "memory";
    c.meta["rows"] = std::to_string(spec.lattice.rows);
    c.meta["cols"] = std::to_string(spec.lattice.cols);
    c.meta["diameter"] = std::to_string(std::max(spec.lattice.rows, spec.lattice.cols));
    c.meta["pitch"] = spec.schedule.pitch ? std::to_string(*spec.schedule.pitch) : "none";
    c.meta["hold"] = std::to_string(spec.schedule.hold);
    c.meta["basis"] = std::string(1, basis_char(spec.basis));
    c.meta["rounds"] = std::to_string(spec.rounds);
    c.meta["final_round_start"] = std::to_string(4 * (spec.rounds - 1) + 1);
    return c;
}

Circuit build_surgery(const SurgeryExperimentSpec &spec) {
    const int d = spec.distance;
    if (d < 2) {
        throw std::invalid_argument("surgery patch distance must be >= 2");
    }
    if (spec.rounds_before < 0 || spec.rounds_during < 1 || spec.rounds_after < 0 || spec.blocks < 1) {
        throw std::invalid_argument("invalid surgery round counts");
    }
    const int block_rounds = spec.rounds_before + spec.rounds_during + spec.rounds_after;
    const int rounds = block_rounds * spec.blocks;
    if (rounds < 2) {
        throw std::invalid_argument("surgery experiment needs at least 2 rounds");
    }
    LatticeSpec lattice(d, 2 * d);
    const int before = spec.rounds_before;
    const int during = spec.rounds_during;
    EdgeSchedule schedule = [d, before, during, block_rounds](const Edge &edge, std::int64_t t) {
        if (t % 4 != interleave_b(edge)) {
            return false;
        }
        if (edge.orientation == Orientation::Horizontal && edge.index == d) {
            std::int64_t round_in_block = (t / 4) % block_rounds;
            return round_in_block >= before && round_in_block < before + during;
        }
        return true;
    };
    Built b = build_impl(lattice, schedule, spec.basis, rounds);
    Circuit &c = b.circuit;
    const std::size_t last = c.layers.size() - 1;
    if (spec.basis == Basis::X) {
        std::vector<std::int64_t> a_recs;
        std::vector<std::int64_t> b_recs;
        for (auto q : logical_support(lattice, Basis::X, 0)) {
            a_recs.push_back(b.final_records[q]);
        }
        for (auto q : logical_support(lattice, Basis::X, d)) {
            b_recs.push_back(b.final_records[q]);
        }
        c.observables.push_back(observable_from(0, std::move(a_recs), last));
        c.observables.push_back(observable_from(1, std::move(b_recs), last));
        for (int k = 0; k < spec.blocks; k++) {
            std::vector<std::int64_t> seam;
            for (const auto &er : b.edge_records) {
                if (er.edge.orientation == Orientation::Horizontal && er.edge.index == d &&
                    er.t / 4 / block_rounds == k) {
                    seam.push_back(er.record);
                }
            }
            c.observables.push_back(observable_from(static_cast<std::uint32_t>(2 + k), std::move(seam), last));
        }
    } else {
        std::vector<std::int64_t> zz;
        for (auto q : logical_support(lattice, Basis::Z, 0)) {
            zz.push_back(b.final_records[q]);
        }
        c.observables.push_back(observable_from(0, std::move(zz), last));
    }

    c.meta["experiment"] = "surgery";
    c.meta["rows"] = std::to_string(lattice.rows);
    c.meta["cols"] = std::to_string(lattice.cols);
    c.meta["diameter"] = std::to_string(d);
    c.meta["pitch"] = "none";
    c.meta["hold"] = "1";
    c.meta["basis"] = std::string(1, basis_char(spec.basis));
    c.meta["rounds"] = std::to_string(rounds);
    c.meta["final_round_start"] = std::to_string(4 * (rounds - 1) + 1);
    return c;
}

}  // namespace fractalshor
