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

#include "fractalshor/tableau.hpp"

#include <bit>
#include <stdexcept>

namespace fractalshor {

bool PauliString::commutes(const PauliString &other) const {
    return (std::popcount((x & other.z) ^ (z & other.x)) & 1) == 0;
}

PauliString PauliString::operator*(const PauliString &other) const {
    // (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^{|z1 & x2|} X^{x1^x2} Z^{z1^z2}
    int k = phase + other.phase + 2 * std::popcount(z & other.x);
    return PauliString{x ^ other.x, z ^ other.z, static_cast<std::uint8_t>(k & 3)};
}

TableauSimulator::TableauSimulator(std::uint32_t num_qubits, std::uint64_t seed) : n_(num_qubits), rng_(seed) {
    if (num_qubits > kMaxQubits) {
        throw std::invalid_argument("tableau oracle supports at most 32 qubits");
    }
    for (std::uint32_t q = 0; q < n_; q++) {
        generators_.push_back(PauliString{0, std::uint32_t{1} << q, 0});
    }
}

bool TableauSimulator::is_deterministic(const PauliString &observable) const {
    for (const auto &g : generators_) {
        if (!g.commutes(observable)) {
            return false;
        }
    }
    return true;
}

std::uint8_t TableauSimulator::deterministic_value(const PauliString &observable) const {
    // Solve observable ~ product of a subset of generators over GF(2).
    const std::size_t m = generators_.size();
    std::vector<std::uint64_t> rows(m);
    std::vector<std::uint64_t> combo(m);
    for (std::size_t i = 0; i < m; i++) {
        rows[i] = std::uint64_t{generators_[i].x} | (std::uint64_t{generators_[i].z} << 32);
        combo[i] = std::uint64_t{1} << i;
    }
    std::uint64_t target = std::uint64_t{observable.x} | (std::uint64_t{observable.z} << 32);
    std::uint64_t used = 0;
    std::size_t rank = 0;
    for (int bit = 0; bit < 64 && rank < m; bit++) {
        std::uint64_t mask = std::uint64_t{1} << bit;
        std::size_t pivot = rank;
        while (pivot < m && !(rows[pivot] & mask)) {
            pivot++;
        }
        if (pivot == m) {
            continue;
        }
        std::swap(rows[pivot], rows[rank]);
        std::swap(combo[pivot], combo[rank]);
        for (std::size_t i = 0; i < m; i++) {
            if (i != rank && (rows[i] & mask)) {
                rows[i] ^= rows[rank];
                combo[i] ^= combo[rank];
            }
        }
        if (target & mask) {
            target ^= rows[rank];
            used ^= combo[rank];
        }
        rank++;
    }
    if (target != 0) {
        throw std::logic_error("commuting observable is not in the stabilizer group");
    }
    PauliString product{0, 0, 0};
    for (std::size_t i = 0; i < m; i++) {
        if ((used >> i) & 1) {
            product = product * generators_[i];
        }
    }
    int diff = (observable.phase - product.phase) & 3;
    if (diff == 0) {
        return 0;
    }
    if (diff == 2) {
        return 1;
    }
    throw std::logic_error("non-Hermitian observable");
}

std::uint8_t TableauSimulator::measure(const PauliString &observable) {
    std::size_t pivot = generators_.size();
    for (std::size_t i = 0; i < generators_.size(); i++) {
        if (!generators_[i].commutes(observable)) {
            pivot = i;
            break;
        }
    }
    if (pivot == generators_.size()) {
        return deterministic_value(observable);
    }
    for (std::size_t i = pivot + 1; i < generators_.size(); i++) {
        if (!generators_[i].commutes(observable)) {
            generators_[i] = generators_[i] * generators_[pivot];
        }
    }
    auto outcome = static_cast<std::uint8_t>(rng_() & 1);
    PauliString g = observable;
    g.phase = static_cast<std::uint8_t>((observable.phase + 2 * outcome) & 3);
    generators_[pivot] = g;
    return outcome;
}

void TableauSimulator::apply(const PauliString &pauli) {
    for (auto &g : generators_) {
        if (!g.commutes(pauli)) {
            g.phase = static_cast<std::uint8_t>((g.phase + 2) & 3);
        }
    }
}

void TableauSimulator::reset(std::uint32_t qubit, Basis basis) {
    std::uint32_t bit = std::uint32_t{1} << qubit;
    PauliString obs = basis == Basis::Z ? PauliString{0, bit, 0} : PauliString{bit, 0, 0};
    PauliString fix = basis == Basis::Z ? PauliString{bit, 0, 0} : PauliString{0, bit, 0};
    if (measure(obs)) {
        apply(fix);
    }
}

namespace {

PauliString single(std::uint32_t q, Pauli p) {
    std::uint32_t bit = std::uint32_t{1} << q;
    PauliString s;
    if (pauli_x(p)) s.x |= bit;
    if (pauli_z(p)) s.z |= bit;
    return s;
}

PauliString pair_observable(GateKind kind, std::span<const std::uint32_t> qs) {
    PauliString s;
    for (auto q : qs) {
        std::uint32_t bit = std::uint32_t{1} << q;
        if (gate_basis(kind) == Basis::X) {
            s.x |= bit;
        } else {
            s.z |= bit;
        }
    }
    return s;
}

/// Runs ops in order. `noise(op_index, group)` returns the fault outcome to
/// inject at that site (0 for none).
template <typename NoiseFn>
std::vector<std::uint8_t> run(const CompiledCircuit &c, std::uint64_t seed, NoiseFn &&noise) {
    TableauSimulator sim(c.num_qubits, seed);
    std::vector<std::uint8_t> rec(c.num_records, 0);
    for (std::size_t k = 0; k < c.ops.size(); k++) {
        const CompiledOp &op = c.ops[k];
        auto t = c.op_targets(k);
        const std::size_t gs = static_cast<std::size_t>(group_size(op.kind));
        for (std::size_t g = 0; g < t.size() / gs; g++) {
            auto qs = t.subspan(g * gs, gs);
            int outcome = num_fault_outcomes(op) > 0 ? noise(k, g) : 0;
            switch (op.kind) {
                case GateKind::RX:
                case GateKind::RZ:
                    sim.reset(qs[0], gate_basis(op.kind));
                    break;
                case GateKind::MX:
                case GateKind::MZ:
                case GateKind::MXX:
                case GateKind::MZZ:
                    rec[op.record_begin + g] = sim.measure(pair_observable(op.kind, qs)) ^ (outcome ? 1 : 0);
                    break;
                case GateKind::IDLE:
                    break;
                default:
                    if (outcome) {
                        auto [p0, p1] = fault_outcome_paulis(op.kind, outcome);
                        PauliString e = single(qs[0], p0);
                        if (gs == 2) {
                            e = e * single(qs[1], p1);
                        }
                        sim.apply(e);
                    }
                    break;
            }
        }
    }
    return rec;
}

}  // namespace

std::vector<std::uint8_t> tableau_records(const CompiledCircuit &circuit, std::uint64_t seed,
                                          const std::vector<FaultLocation> &faults) {
    return run(circuit, seed, [&](std::size_t k, std::size_t g) {
        int outcome = 0;
        for (const auto &f : faults) {
            if (f.instruction == k && f.group == g) {
                // Two faults on the same site compose; only Pauli/flip parity matters.
                if (outcome == 0) {
                    outcome = f.outcome;
                } else {
                    throw std::invalid_argument("at most one fault per site");
                }
            }
        }
        return outcome;
    });
}

Symptom tableau_symptom_of_records(const CompiledCircuit &c, const std::vector<std::uint8_t> &records) {
    Symptom s;
    for (std::uint32_t d = 0; d < c.num_detectors; d++) {
        std::uint8_t v = 0;
        for (std::uint32_t k = c.det_offsets[d]; k < c.det_offsets[d + 1]; k++) v ^= records[c.det_records[k]];
        if (v) s.detectors.push_back(d);
    }
    for (std::uint32_t o = 0; o < c.num_observables; o++) {
        std::uint8_t v = 0;
        for (std::uint32_t k = c.obs_offsets[o]; k < c.obs_offsets[o + 1]; k++) v ^= records[c.obs_records[k]];
        if (v) s.observables.push_back(o);
    }
    return s;
}

Symptom tableau_fault_symptom(const CompiledCircuit &circuit, const FaultLocation &fault, std::uint64_t seed) {
    auto clean = tableau_symptom_of_records(circuit, tableau_records(circuit, seed, {}));
    auto dirty = tableau_symptom_of_records(circuit, tableau_records(circuit, seed + 7919, {fault}));
    return symptom_xor(clean, dirty);
}

bool tableau_deterministic(const CompiledCircuit &circuit, int trials, std::uint64_t seed) {
    Symptom first;
    for (int k = 0; k < trials; k++) {
        auto s = tableau_symptom_of_records(circuit, tableau_records(circuit, seed + k, {}));
        if (!s.detectors.empty()) {
            return false;
        }
        if (k == 0) {
            first = s;
        } else if (!(s == first)) {
            return false;
        }
    }
    return true;
}

SyndromeBatch tableau_sample(const CompiledCircuit &circuit, std::size_t shots, std::uint64_t seed) {
    std::mt19937_64 noise_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto reference = tableau_symptom_of_records(circuit, tableau_records(circuit, seed, {}));
    SyndromeBatch out(shots, circuit.num_detectors, circuit.num_observables);
    for (std::size_t s = 0; s < shots; s++) {
        auto rec = run(circuit, seed + 1 + s, [&](std::size_t k, std::size_t) {
            const CompiledOp &op = circuit.ops[k];
            if (op.probability <= 0 || unif(noise_rng) >= op.probability) {
                return 0;
            }
            int n = num_fault_outcomes(op);
            return 1 + static_cast<int>(noise_rng() % static_cast<std::uint64_t>(n));
        });
        auto sym = symptom_xor(tableau_symptom_of_records(circuit, rec), reference);
        for (auto d : sym.detectors) out.set_detector(s, d, true);
        for (auto o : sym.observables) out.set_observable(s, o, true);
    }
    return out;
}

}  // namespace fractalshor
