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

#include "fractalshor/frame_sim.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <functional>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <unordered_map>

namespace fractalshor {

namespace {

struct Hit {
    std::uint32_t op;
    std::uint32_t group;
    std::uint32_t shot;
    std::uint8_t outcome;
};

std::mt19937_64 batch_rng(std::uint64_t seed, std::size_t batch_index, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(batch_index), static_cast<std::uint32_t>(batch_index >> 32), stream};
    return std::mt19937_64(seq);
}

double uniform_open0(std::mt19937_64 &rng) {
    // (0, 1]
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

bool op_is_noisy(const CompiledOp &op) { return num_fault_outcomes(op) > 0 && op.probability > 0; }

/// Every fault hit of one batch, ordered by (op, group, shot).
std::vector<Hit> draw_hits(const CompiledCircuit &c, std::size_t shots, std::mt19937_64 &rng) {
    std::vector<Hit> hits;
    for (std::size_t k = 0; k < c.ops.size(); k++) {
        const CompiledOp &op = c.ops[k];
        if (!op_is_noisy(op)) {
            continue;
        }
        const int outcomes = num_fault_outcomes(op);
        const std::uint64_t total = static_cast<std::uint64_t>(op.num_groups()) * shots;
        auto emit = [&](std::uint64_t site) {
            std::uint8_t outcome = outcomes == 1 ? 1 : static_cast<std::uint8_t>(1 + rng() % outcomes);
            hits.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(site / shots),
                            static_cast<std::uint32_t>(site % shots), outcome});
        };
        if (op.probability >= 1.0) {
            for (std::uint64_t site = 0; site < total; site++) {
                emit(site);
            }
            continue;
        }
        const double log_q = std::log1p(-op.probability);
        std::uint64_t site = 0;
        while (true) {
            double gap = std::floor(std::log(uniform_open0(rng)) / log_q);
            if (gap >= static_cast<double>(total - site)) {
                break;
            }
            site += static_cast<std::uint64_t>(gap);
            emit(site);
            site++;
            if (site >= total) {
                break;
            }
        }
    }
    return hits;
}

/// Random words used by gauge randomization, in (op, group, word) order.
std::vector<std::uint64_t> draw_gauge_words(const CompiledCircuit &c, std::size_t words, std::mt19937_64 &rng) {
    std::vector<std::uint64_t> out;
    for (const auto &op : c.ops) {
        if (is_measurement(op.kind) || is_reset(op.kind)) {
            for (std::uint32_t g = 0; g < op.num_groups(); g++) {
                for (std::size_t w = 0; w < words; w++) {
                    out.push_back(rng());
                }
            }
        }
    }
    return out;
}

void sorted_xor_into(std::vector<std::uint32_t> &acc, std::span<const std::uint32_t> other,
                     std::vector<std::uint32_t> &scratch) {
    scratch.clear();
    std::set_symmetric_difference(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(scratch));
    acc.swap(scratch);
}

Symptom symptom_from_records(const CompiledCircuit &c, const std::vector<std::uint8_t> &flips) {
    Symptom s;
    for (std::uint32_t d = 0; d < c.num_detectors; d++) {
        std::uint8_t parity = 0;
        for (std::uint32_t k = c.det_offsets[d]; k < c.det_offsets[d + 1]; k++) {
            parity ^= flips[c.det_records[k]];
        }
        if (parity) {
            s.detectors.push_back(d);
        }
    }
    for (std::uint32_t o = 0; o < c.num_observables; o++) {
        std::uint8_t parity = 0;
        for (std::uint32_t k = c.obs_offsets[o]; k < c.obs_offsets[o + 1]; k++) {
            parity ^= flips[c.obs_records[k]];
        }
        if (parity) {
            s.observables.push_back(o);
        }
    }
    return s;
}

}  // namespace

CompiledCircuit::CompiledCircuit(const Circuit &circuit) {
    require_valid(circuit);
    num_qubits = circuit.num_qubits();
    std::uint32_t rec = 0;
    for (std::size_t l = 0; l < circuit.layers.size(); l++) {
        for (const auto &inst : circuit.layers[l].instructions) {
            CompiledOp op{};
            op.kind = inst.kind;
            op.annotated = inst.probability.has_value();
            op.probability = inst.probability.value_or(0.0);
            op.target_begin = static_cast<std::uint32_t>(targets.size());
            targets.insert(targets.end(), inst.targets.begin(), inst.targets.end());
            op.target_end = static_cast<std::uint32_t>(targets.size());
            op.record_begin = rec;
            op.layer = static_cast<std::uint32_t>(l);
            if (is_measurement(inst.kind)) {
                rec += static_cast<std::uint32_t>(inst.num_groups());
            }
            ops.push_back(op);
        }
    }
    num_records = rec;

    std::vector<Basis> record_basis(num_records);
    for (const auto &op : ops) {
        if (is_measurement(op.kind)) {
            for (std::uint32_t g = 0; g < op.num_groups(); g++) {
                record_basis[op.record_begin + g] = gate_basis(op.kind);
            }
        }
    }

    num_detectors = static_cast<std::uint32_t>(circuit.detectors.size());
    det_offsets.push_back(0);
    for (const auto &d : circuit.detectors) {
        for (auto r : d.records) {
            det_records.push_back(static_cast<std::uint32_t>(r));
        }
        det_offsets.push_back(static_cast<std::uint32_t>(det_records.size()));
        det_basis.push_back(d.coords.basis);
    }

    auto obs = circuit.observable_records();
    num_observables = static_cast<std::uint32_t>(obs.size());
    if (num_observables > 64) {
        throw std::invalid_argument("at most 64 observables are supported");
    }
    obs_offsets.push_back(0);
    for (const auto &recs : obs) {
        std::optional<Basis> basis;
        for (auto r : recs) {
            obs_records.push_back(static_cast<std::uint32_t>(r));
            if (basis && *basis != record_basis[r]) {
                throw std::invalid_argument("observable mixes X-type and Z-type measurement records");
            }
            basis = record_basis[r];
        }
        obs_offsets.push_back(static_cast<std::uint32_t>(obs_records.size()));
        obs_basis.push_back(basis.value_or(Basis::X));
    }
}

int num_fault_outcomes(const CompiledOp &op) {
    if (!op.annotated) {
        return 0;
    }
    switch (op.kind) {
        case GateKind::XERR:
        case GateKind::ZERR:
            return 1;
        case GateKind::DEP1:
            return 3;
        case GateKind::DEP2:
            return 15;
        case GateKind::MX:
        case GateKind::MZ:
        case GateKind::MXX:
        case GateKind::MZZ:
            return 1;
        default:
            return 0;
    }
}

double fault_outcome_probability(const CompiledOp &op) {
    int k = num_fault_outcomes(op);
    return k == 0 ? 0.0 : op.probability / k;
}

std::pair<Pauli, Pauli> fault_outcome_paulis(GateKind kind, int outcome) {
    switch (kind) {
        case GateKind::XERR:
            return {Pauli::X, Pauli::I};
        case GateKind::ZERR:
            return {Pauli::Z, Pauli::I};
        case GateKind::DEP1:
            if (outcome < 1 || outcome > 3) {
                throw std::out_of_range("DEP1 outcome must be in 1..3");
            }
            return {static_cast<Pauli>(outcome), Pauli::I};
        case GateKind::DEP2:
            if (outcome < 1 || outcome > 15) {
                throw std::out_of_range("DEP2 outcome must be in 1..15");
            }
            return {static_cast<Pauli>(outcome / 4), static_cast<Pauli>(outcome % 4)};
        default:
            throw std::invalid_argument("not a Pauli noise channel");
    }
}

Symptom symptom_xor(const Symptom &a, const Symptom &b) {
    Symptom out;
    std::set_symmetric_difference(a.detectors.begin(), a.detectors.end(), b.detectors.begin(), b.detectors.end(),
                                  std::back_inserter(out.detectors));
    std::set_symmetric_difference(a.observables.begin(), a.observables.end(), b.observables.begin(),
                                  b.observables.end(), std::back_inserter(out.observables));
    return out;
}

// ---------------------------------------------------------------------------
// SyndromeBatch

SyndromeBatch::SyndromeBatch(std::size_t shots, std::size_t num_detectors, std::size_t num_observables)
    : shots_(shots),
      num_detectors_(num_detectors),
      num_observables_(num_observables),
      det_stride_((num_detectors + 63) / 64),
      obs_stride_((num_observables + 63) / 64),
      det_bits_(shots * det_stride_, 0),
      obs_bits_(shots * obs_stride_, 0) {}

bool SyndromeBatch::detector(std::size_t shot, std::size_t det) const {
    return (det_bits_[shot * det_stride_ + det / 64] >> (det % 64)) & 1;
}

bool SyndromeBatch::observable(std::size_t shot, std::size_t obs) const {
    return (obs_bits_[shot * obs_stride_ + obs / 64] >> (obs % 64)) & 1;
}

void SyndromeBatch::set_detector(std::size_t shot, std::size_t det, bool value) {
    auto &w = det_bits_[shot * det_stride_ + det / 64];
    std::uint64_t bit = std::uint64_t{1} << (det % 64);
    w = value ? (w | bit) : (w & ~bit);
}

void SyndromeBatch::set_observable(std::size_t shot, std::size_t obs, bool value) {
    auto &w = obs_bits_[shot * obs_stride_ + obs / 64];
    std::uint64_t bit = std::uint64_t{1} << (obs % 64);
    w = value ? (w | bit) : (w & ~bit);
}

std::span<const std::uint64_t> SyndromeBatch::detector_row(std::size_t shot) const {
    return {det_bits_.data() + shot * det_stride_, det_stride_};
}
std::span<std::uint64_t> SyndromeBatch::detector_row(std::size_t shot) {
    return {det_bits_.data() + shot * det_stride_, det_stride_};
}
std::span<const std::uint64_t> SyndromeBatch::observable_row(std::size_t shot) const {
    return {obs_bits_.data() + shot * obs_stride_, obs_stride_};
}
std::span<std::uint64_t> SyndromeBatch::observable_row(std::size_t shot) {
    return {obs_bits_.data() + shot * obs_stride_, obs_stride_};
}

std::vector<std::uint32_t> SyndromeBatch::fired_detectors(std::size_t shot) const {
    std::vector<std::uint32_t> out;
    auto row = detector_row(shot);
    for (std::size_t w = 0; w < row.size(); w++) {
        std::uint64_t bits = row[w];
        while (bits) {
            out.push_back(static_cast<std::uint32_t>(w * 64 + std::countr_zero(bits)));
            bits &= bits - 1;
        }
    }
    return out;
}

std::uint64_t SyndromeBatch::observable_mask(std::size_t shot) const {
    return obs_stride_ == 0 ? 0 : obs_bits_[shot * obs_stride_];
}

namespace {

void write_u32(std::ostream &out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char *>(b), 4);
}

std::uint32_t read_u32(std::istream &in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char *>(b), 4)) {
        throw std::runtime_error("truncated syndrome file header");
    }
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
           (std::uint32_t{b[3]} << 24);
}

void write_rows(std::ostream &out, std::size_t shots, std::size_t bits,
                const std::function<bool(std::size_t, std::size_t)> &get) {
    std::vector<char> row((bits + 7) / 8);
    for (std::size_t s = 0; s < shots; s++) {
        std::fill(row.begin(), row.end(), 0);
        for (std::size_t k = 0; k < bits; k++) {
            if (get(s, k)) {
                row[k / 8] = static_cast<char>(row[k / 8] | (1 << (k % 8)));
            }
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

void read_rows(std::istream &in, std::size_t shots, std::size_t bits,
               const std::function<void(std::size_t, std::size_t)> &set) {
    std::vector<char> row((bits + 7) / 8);
    for (std::size_t s = 0; s < shots; s++) {
        if (!in.read(row.data(), static_cast<std::streamsize>(row.size()))) {
            throw std::runtime_error("truncated syndrome file body");
        }
        for (std::size_t k = 0; k < bits; k++) {
            if ((static_cast<unsigned char>(row[k / 8]) >> (k % 8)) & 1) {
                set(s, k);
            }
        }
    }
}

}  // namespace

void SyndromeBatch::write_binary(std::ostream &out) const {
    out.write("FSB1", 4);
    write_u32(out, static_cast<std::uint32_t>(shots_));
    write_u32(out, static_cast<std::uint32_t>(num_detectors_));
    write_u32(out, static_cast<std::uint32_t>(num_observables_));
    write_rows(out, shots_, num_detectors_, [&](std::size_t s, std::size_t k) { return detector(s, k); });
    write_rows(out, shots_, num_observables_, [&](std::size_t s, std::size_t k) { return observable(s, k); });
}

SyndromeBatch SyndromeBatch::read_binary(std::istream &in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "FSB1", 4) != 0) {
        throw std::runtime_error("not an FSB1 syndrome file");
    }
    std::uint32_t shots = read_u32(in);
    std::uint32_t dets = read_u32(in);
    std::uint32_t obs = read_u32(in);
    SyndromeBatch b(shots, dets, obs);
    read_rows(in, shots, dets, [&](std::size_t s, std::size_t k) { b.set_detector(s, k, true); });
    read_rows(in, shots, obs, [&](std::size_t s, std::size_t k) { b.set_observable(s, k, true); });
    return b;
}

void SyndromeBatch::write_text(std::ostream &out) const {
    for (std::size_t s = 0; s < shots_; s++) {
        out << "shot " << s << ":";
        for (auto d : fired_detectors(s)) {
            out << " D" << d;
        }
        for (std::size_t o = 0; o < num_observables_; o++) {
            if (observable(s, o)) {
                out << " L" << o;
            }
        }
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Sampling kernels

SyndromeBatch sample_batch_packed(const CompiledCircuit &c, std::size_t batch_index, std::size_t shots,
                                  std::uint64_t seed, bool gauge_randomize) {
    auto rng = batch_rng(seed, batch_index, 0);
    const std::vector<Hit> hits = draw_hits(c, shots, rng);
    const std::size_t W = (shots + 63) / 64;
    std::vector<std::uint64_t> gauge;
    if (gauge_randomize) {
        auto grng = batch_rng(seed, batch_index, 1);
        gauge = draw_gauge_words(c, W, grng);
    }
    std::size_t gauge_pos = 0;

    std::vector<std::uint64_t> x(static_cast<std::size_t>(c.num_qubits) * W, 0);
    std::vector<std::uint64_t> z(static_cast<std::size_t>(c.num_qubits) * W, 0);
    std::vector<std::uint64_t> rec(static_cast<std::size_t>(c.num_records) * W, 0);
    std::size_t hit_pos = 0;

    auto flip = [W](std::vector<std::uint64_t> &v, std::uint32_t row, std::uint32_t shot) {
        v[row * W + shot / 64] ^= std::uint64_t{1} << (shot % 64);
    };

    for (std::size_t k = 0; k < c.ops.size(); k++) {
        const CompiledOp &op = c.ops[k];
        auto t = c.op_targets(k);
        switch (op.kind) {
            case GateKind::RX:
            case GateKind::RZ:
                for (auto q : t) {
                    std::uint64_t *xq = &x[q * W];
                    std::uint64_t *zq = &z[q * W];
                    for (std::size_t w = 0; w < W; w++) {
                        xq[w] = 0;
                        zq[w] = 0;
                    }
                    if (gauge_randomize) {
                        std::uint64_t *dst = op.kind == GateKind::RX ? xq : zq;
                        for (std::size_t w = 0; w < W; w++) {
                            dst[w] = gauge[gauge_pos++];
                        }
                    }
                }
                break;
            case GateKind::MX:
            case GateKind::MZ: {
                const bool xb = op.kind == GateKind::MX;
                for (std::uint32_t g = 0; g < t.size(); g++) {
                    const std::uint64_t *src = xb ? &z[t[g] * W] : &x[t[g] * W];
                    std::uint64_t *dst = &rec[(op.record_begin + g) * W];
                    for (std::size_t w = 0; w < W; w++) {
                        dst[w] = src[w];
                    }
                }
                while (hit_pos < hits.size() && hits[hit_pos].op == k) {
                    flip(rec, op.record_begin + hits[hit_pos].group, hits[hit_pos].shot);
                    hit_pos++;
                }
                if (gauge_randomize) {
                    for (std::uint32_t g = 0; g < t.size(); g++) {
                        std::uint64_t *dst = xb ? &x[t[g] * W] : &z[t[g] * W];
                        for (std::size_t w = 0; w < W; w++) {
                            dst[w] ^= gauge[gauge_pos++];
                        }
                    }
                }
                break;
            }
            case GateKind::MXX:
            case GateKind::MZZ: {
                const bool xb = op.kind == GateKind::MXX;
                auto &frame = xb ? z : x;
                for (std::uint32_t g = 0; g < t.size() / 2; g++) {
                    const std::uint64_t *a = &frame[t[2 * g] * W];
                    const std::uint64_t *b = &frame[t[2 * g + 1] * W];
                    std::uint64_t *dst = &rec[(op.record_begin + g) * W];
                    for (std::size_t w = 0; w < W; w++) {
                        dst[w] = a[w] ^ b[w];
                    }
                }
                while (hit_pos < hits.size() && hits[hit_pos].op == k) {
                    flip(rec, op.record_begin + hits[hit_pos].group, hits[hit_pos].shot);
                    hit_pos++;
                }
                if (gauge_randomize) {
                    auto &gframe = xb ? x : z;
                    for (std::uint32_t g = 0; g < t.size() / 2; g++) {
                        std::uint64_t *a = &gframe[t[2 * g] * W];
                        std::uint64_t *b = &gframe[t[2 * g + 1] * W];
                        for (std::size_t w = 0; w < W; w++) {
                            std::uint64_t r = gauge[gauge_pos++];
                            a[w] ^= r;
                            b[w] ^= r;
                        }
                    }
                }
                break;
            }
            case GateKind::IDLE:
                break;
            case GateKind::XERR:
            case GateKind::ZERR:
            case GateKind::DEP1:
            case GateKind::DEP2: {
                const std::size_t gs = static_cast<std::size_t>(group_size(op.kind));
                while (hit_pos < hits.size() && hits[hit_pos].op == k) {
                    const Hit &h = hits[hit_pos++];
                    auto [p0, p1] = fault_outcome_paulis(op.kind, h.outcome);
                    std::uint32_t q0 = t[h.group * gs];
                    if (pauli_x(p0)) flip(x, q0, h.shot);
                    if (pauli_z(p0)) flip(z, q0, h.shot);
                    if (gs == 2) {
                        std::uint32_t q1 = t[h.group * gs + 1];
                        if (pauli_x(p1)) flip(x, q1, h.shot);
                        if (pauli_z(p1)) flip(z, q1, h.shot);
                    }
                }
                break;
            }
        }
    }

    SyndromeBatch out(shots, c.num_detectors, c.num_observables);
    std::vector<std::uint64_t> acc(W);
    auto emit = [&](std::span<const std::uint32_t> recs, auto &&set) {
        std::fill(acc.begin(), acc.end(), 0);
        for (auto r : recs) {
            const std::uint64_t *src = &rec[r * W];
            for (std::size_t w = 0; w < W; w++) {
                acc[w] ^= src[w];
            }
        }
        for (std::size_t w = 0; w < W; w++) {
            std::uint64_t bits = acc[w];
            while (bits) {
                std::size_t s = w * 64 + std::countr_zero(bits);
                bits &= bits - 1;
                if (s < shots) {
                    set(s);
                }
            }
        }
    };
    for (std::uint32_t d = 0; d < c.num_detectors; d++) {
        emit({c.det_records.data() + c.det_offsets[d], c.det_records.data() + c.det_offsets[d + 1]},
             [&](std::size_t s) { out.set_detector(s, d, true); });
    }
    for (std::uint32_t o = 0; o < c.num_observables; o++) {
        emit({c.obs_records.data() + c.obs_offsets[o], c.obs_records.data() + c.obs_offsets[o + 1]},
             [&](std::size_t s) { out.set_observable(s, o, true); });
    }
    return out;
}

SyndromeBatch sample_batch_reference(const CompiledCircuit &c, std::size_t batch_index, std::size_t shots,
                                     std::uint64_t seed, bool gauge_randomize) {
    auto rng = batch_rng(seed, batch_index, 0);
    const std::vector<Hit> hits = draw_hits(c, shots, rng);
    const std::size_t W = (shots + 63) / 64;
    std::vector<std::uint64_t> gauge;
    if (gauge_randomize) {
        auto grng = batch_rng(seed, batch_index, 1);
        gauge = draw_gauge_words(c, W, grng);
    }
    std::vector<std::vector<Hit>> by_shot(shots);
    for (const auto &h : hits) {
        by_shot[h.shot].push_back(h);
    }

    SyndromeBatch out(shots, c.num_detectors, c.num_observables);
    std::vector<std::uint8_t> x(c.num_qubits), z(c.num_qubits), rec(c.num_records);
    for (std::size_t s = 0; s < shots; s++) {
        std::fill(x.begin(), x.end(), 0);
        std::fill(z.begin(), z.end(), 0);
        std::fill(rec.begin(), rec.end(), 0);
        const auto &mine = by_shot[s];
        std::size_t hp = 0;
        std::size_t gp = 0;
        auto gauge_bit = [&]() -> std::uint8_t {
            std::uint8_t b = (gauge[gp + s / 64] >> (s % 64)) & 1;
            gp += W;
            return b;
        };
        for (std::size_t k = 0; k < c.ops.size(); k++) {
            const CompiledOp &op = c.ops[k];
            auto t = c.op_targets(k);
            const std::size_t gs = static_cast<std::size_t>(group_size(op.kind));
            const std::size_t groups = t.size() / gs;
            for (std::size_t g = 0; g < groups; g++) {
                std::uint32_t a = t[g * gs];
                std::uint32_t b = gs == 2 ? t[g * gs + 1] : a;
                switch (op.kind) {
                    case GateKind::RX:
                    case GateKind::RZ:
                        x[a] = z[a] = 0;
                        if (gauge_randomize) {
                            (op.kind == GateKind::RX ? x[a] : z[a]) = gauge_bit();
                        }
                        break;
                    case GateKind::MX:
                        rec[op.record_begin + g] = z[a];
                        break;
                    case GateKind::MZ:
                        rec[op.record_begin + g] = x[a];
                        break;
                    case GateKind::MXX:
                        rec[op.record_begin + g] = z[a] ^ z[b];
                        break;
                    case GateKind::MZZ:
                        rec[op.record_begin + g] = x[a] ^ x[b];
                        break;
                    default:
                        break;
                }
            }
            while (hp < mine.size() && mine[hp].op == k) {
                const Hit &h = mine[hp++];
                if (is_measurement(op.kind)) {
                    rec[op.record_begin + h.group] ^= 1;
                    continue;
                }
                auto [p0, p1] = fault_outcome_paulis(op.kind, h.outcome);
                std::uint32_t q0 = t[h.group * gs];
                x[q0] ^= pauli_x(p0);
                z[q0] ^= pauli_z(p0);
                if (gs == 2) {
                    std::uint32_t q1 = t[h.group * gs + 1];
                    x[q1] ^= pauli_x(p1);
                    z[q1] ^= pauli_z(p1);
                }
            }
            if (gauge_randomize && is_measurement(op.kind)) {
                for (std::size_t g = 0; g < groups; g++) {
                    std::uint32_t a = t[g * gs];
                    switch (op.kind) {
                        case GateKind::MX:
                            x[a] ^= gauge_bit();
                            break;
                        case GateKind::MZ:
                            z[a] ^= gauge_bit();
                            break;
                        case GateKind::MXX: {
                            std::uint8_t r = gauge_bit();
                            x[a] ^= r;
                            x[t[g * gs + 1]] ^= r;
                            break;
                        }
                        default: {
                            std::uint8_t r = gauge_bit();
                            z[a] ^= r;
                            z[t[g * gs + 1]] ^= r;
                            break;
                        }
                    }
                }
            }
        }
        Symptom sym = symptom_from_records(c, rec);
        for (auto d : sym.detectors) {
            out.set_detector(s, d, true);
        }
        for (auto o : sym.observables) {
            out.set_observable(s, o, true);
        }
    }
    return out;
}

SyndromeBatch sample(const CompiledCircuit &c, std::size_t shots, std::uint64_t seed, const SampleOptions &options) {
    if (shots == 0) {
        throw std::invalid_argument("sample() needs at least one shot");
    }
    if (options.batch_size == 0) {
        throw std::invalid_argument("batch size must be positive");
    }
    const std::size_t B = options.batch_size;
    const std::size_t batches = (shots + B - 1) / B;
    SyndromeBatch out(shots, c.num_detectors, c.num_observables);
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::size_t b = 0; b < batches; b++) {
        const std::size_t first = b * B;
        const std::size_t n = std::min(B, shots - first);
        SyndromeBatch part = sample_batch_packed(c, b, n, seed, options.gauge_randomize);
        for (std::size_t s = 0; s < n; s++) {
            auto src_d = part.detector_row(s);
            std::copy(src_d.begin(), src_d.end(), out.detector_row(first + s).begin());
            auto src_o = part.observable_row(s);
            std::copy(src_o.begin(), src_o.end(), out.observable_row(first + s).begin());
        }
    }
    return out;
}

SyndromeBatch sample(const Circuit &circuit, std::size_t shots, std::uint64_t seed, const SampleOptions &options) {
    return sample(CompiledCircuit(circuit), shots, seed, options);
}

// ---------------------------------------------------------------------------
// Single faults

Symptom propagate_fault(const CompiledCircuit &c, const FaultLocation &fault) {
    if (fault.instruction >= c.ops.size()) {
        throw std::out_of_range("fault instruction " + std::to_string(fault.instruction) + " out of range");
    }
    const CompiledOp &fop = c.ops[fault.instruction];
    const int outcomes = num_fault_outcomes(fop);
    if (outcomes == 0) {
        throw std::invalid_argument("instruction " + std::to_string(fault.instruction) + " has no noise channel");
    }
    if (fault.group >= fop.num_groups()) {
        throw std::out_of_range("fault group out of range");
    }
    if (fault.outcome < 1 || fault.outcome > outcomes) {
        throw std::out_of_range("fault outcome out of range");
    }
    std::vector<std::uint8_t> x(c.num_qubits, 0), z(c.num_qubits, 0), rec(c.num_records, 0);
    auto ft = c.op_targets(fault.instruction);
    if (is_measurement(fop.kind)) {
        rec[fop.record_begin + fault.group] ^= 1;
    } else {
        const std::size_t gs = static_cast<std::size_t>(group_size(fop.kind));
        auto [p0, p1] = fault_outcome_paulis(fop.kind, fault.outcome);
        std::uint32_t q0 = ft[fault.group * gs];
        x[q0] ^= pauli_x(p0);
        z[q0] ^= pauli_z(p0);
        if (gs == 2) {
            std::uint32_t q1 = ft[fault.group * gs + 1];
            x[q1] ^= pauli_x(p1);
            z[q1] ^= pauli_z(p1);
        }
    }
    for (std::size_t k = fault.instruction + 1; k < c.ops.size(); k++) {
        const CompiledOp &op = c.ops[k];
        auto t = c.op_targets(k);
        switch (op.kind) {
            case GateKind::RX:
            case GateKind::RZ:
                for (auto q : t) {
                    x[q] = z[q] = 0;
                }
                break;
            case GateKind::MX:
                for (std::uint32_t g = 0; g < t.size(); g++) rec[op.record_begin + g] = z[t[g]];
                break;
            case GateKind::MZ:
                for (std::uint32_t g = 0; g < t.size(); g++) rec[op.record_begin + g] = x[t[g]];
                break;
            case GateKind::MXX:
                for (std::uint32_t g = 0; g < t.size() / 2; g++) {
                    rec[op.record_begin + g] = z[t[2 * g]] ^ z[t[2 * g + 1]];
                }
                break;
            case GateKind::MZZ:
                for (std::uint32_t g = 0; g < t.size() / 2; g++) {
                    rec[op.record_begin + g] = x[t[2 * g]] ^ x[t[2 * g + 1]];
                }
                break;
            default:
                break;
        }
    }
    return symptom_from_records(c, rec);
}

Symptom propagate_fault(const Circuit &circuit, const FaultLocation &fault) {
    return propagate_fault(CompiledCircuit(circuit), fault);
}

void for_each_fault(const CompiledCircuit &c,
                    const std::function<void(const FaultLocation &, double, const Symptom &)> &visit) {
    const std::uint32_t D = c.num_detectors;
    // Sorted symptom ids touched by each record; observables are offset by D.
    std::vector<std::vector<std::uint32_t>> rec_targets(c.num_records);
    for (std::uint32_t d = 0; d < D; d++) {
        for (std::uint32_t k = c.det_offsets[d]; k < c.det_offsets[d + 1]; k++) {
            rec_targets[c.det_records[k]].push_back(d);
        }
    }
    for (std::uint32_t o = 0; o < c.num_observables; o++) {
        for (std::uint32_t k = c.obs_offsets[o]; k < c.obs_offsets[o + 1]; k++) {
            rec_targets[c.obs_records[k]].push_back(D + o);
        }
    }
    std::vector<std::uint32_t> scratch;
    for (auto &v : rec_targets) {
        std::sort(v.begin(), v.end());
        // A record listed twice in one detector cancels.
        scratch.clear();
        for (std::size_t i = 0; i < v.size();) {
            std::size_t j = i;
            while (j < v.size() && v[j] == v[i]) j++;
            if ((j - i) % 2 == 1) scratch.push_back(v[i]);
            i = j;
        }
        v.swap(scratch);
    }

    // sens[q][0]: ids flipped by X on q at the current point; sens[q][1]: by Z.
    std::vector<std::array<std::vector<std::uint32_t>, 2>> sens(c.num_qubits);
    auto to_symptom = [D](const std::vector<std::uint32_t> &ids) {
        Symptom s;
        for (auto id : ids) {
            if (id < D) {
                s.detectors.push_back(id);
            } else {
                s.observables.push_back(id - D);
            }
        }
        return s;
    };
    auto pauli_sens = [&](std::uint32_t q, Pauli p) {
        std::vector<std::uint32_t> out;
        if (pauli_x(p)) {
            out = sens[q][0];
        }
        if (pauli_z(p)) {
            sorted_xor_into(out, sens[q][1], scratch);
        }
        return out;
    };

    for (std::size_t k = c.ops.size(); k-- > 0;) {
        const CompiledOp &op = c.ops[k];
        auto t = c.op_targets(k);
        const bool noisy = op_is_noisy(op);
        const double p_outcome = fault_outcome_probability(op);
        switch (op.kind) {
            case GateKind::RX:
            case GateKind::RZ:
                for (auto q : t) {
                    sens[q][0].clear();
                    sens[q][1].clear();
                }
                break;
            case GateKind::MX:
            case GateKind::MZ:
            case GateKind::MXX:
            case GateKind::MZZ: {
                const bool pair = is_pairwise(op.kind);
                const int slot = gate_basis(op.kind) == Basis::X ? 1 : 0;
                const std::uint32_t groups = op.num_groups();
                for (std::uint32_t g = 0; g < groups; g++) {
                    const auto &targets_of_rec = rec_targets[op.record_begin + g];
                    if (noisy) {
                        visit(FaultLocation{k, g, 1}, p_outcome, to_symptom(targets_of_rec));
                    }
                    if (pair) {
                        sorted_xor_into(sens[t[2 * g]][slot], targets_of_rec, scratch);
                        sorted_xor_into(sens[t[2 * g + 1]][slot], targets_of_rec, scratch);
                    } else {
                        sorted_xor_into(sens[t[g]][slot], targets_of_rec, scratch);
                    }
                }
                break;
            }
            case GateKind::IDLE:
                break;
            case GateKind::XERR:
            case GateKind::ZERR:
            case GateKind::DEP1:
            case GateKind::DEP2: {
                if (!noisy) {
                    break;
                }
                const int outcomes = num_fault_outcomes(op);
                const std::size_t gs = static_cast<std::size_t>(group_size(op.kind));
                for (std::uint32_t g = 0; g < op.num_groups(); g++) {
                    std::uint32_t q0 = t[g * gs];
                    std::array<std::vector<std::uint32_t>, 4> s0;
                    std::array<std::vector<std::uint32_t>, 4> s1;
                    for (int p = 1; p < 4; p++) {
                        s0[p] = pauli_sens(q0, static_cast<Pauli>(p));
                        if (gs == 2) {
                            s1[p] = pauli_sens(t[g * gs + 1], static_cast<Pauli>(p));
                        }
                    }
                    for (int o = 1; o <= outcomes; o++) {
                        auto [p0, p1] = fault_outcome_paulis(op.kind, o);
                        std::vector<std::uint32_t> ids = s0[static_cast<int>(p0)];
                        if (p1 != Pauli::I) {
                            sorted_xor_into(ids, s1[static_cast<int>(p1)], scratch);
                        }
                        visit(FaultLocation{k, g, o}, p_outcome, to_symptom(ids));
                    }
                }
                break;
            }
        }
    }
}

NonGraphlikeError::NonGraphlikeError(const FaultLocation &fault, const std::string &what)
    : std::runtime_error(what), fault(fault) {}

std::vector<SymptomComponent> decompose_symptom(const CompiledCircuit &c, const Symptom &symptom) {
    std::vector<SymptomComponent> out;
    for (Basis b : {Basis::X, Basis::Z}) {
        SymptomComponent comp{b, {}, 0};
        for (auto d : symptom.detectors) {
            if (c.det_basis[d] == b) {
                comp.detectors.push_back(d);
            }
        }
        for (auto o : symptom.observables) {
            if (c.obs_basis[o] == b) {
                comp.observables |= std::uint64_t{1} << o;
            }
        }
        if (!comp.detectors.empty() || comp.observables != 0) {
            out.push_back(std::move(comp));
        }
    }
    return out;
}

std::vector<FaultMechanism> extract_dem(const CompiledCircuit &c) {
    std::vector<FaultMechanism> mechanisms;
    std::unordered_map<std::string, std::size_t> index;
    for_each_fault(c, [&](const FaultLocation &loc, double p, const Symptom &symptom) {
        for (auto &comp : decompose_symptom(c, symptom)) {
            if (comp.detectors.size() > 2) {
                std::string msg = "fault at instruction " + std::to_string(loc.instruction) + " group " +
                                  std::to_string(loc.group) + " outcome " + std::to_string(loc.outcome) +
                                  " flips " + std::to_string(comp.detectors.size()) + " " +
                                  basis_char(comp.basis) + "-type detectors:";
                for (auto d : comp.detectors) {
                    msg += " D" + std::to_string(d);
                }
                throw NonGraphlikeError(loc, msg);
            }
            std::string key;
            key.push_back(basis_char(comp.basis));
            for (auto d : comp.detectors) {
                key.append(reinterpret_cast<const char *>(&d), sizeof(d));
            }
            key.push_back('|');
            key.append(reinterpret_cast<const char *>(&comp.observables), sizeof(comp.observables));
            auto [it, inserted] = index.try_emplace(key, mechanisms.size());
            if (inserted) {
                mechanisms.push_back(FaultMechanism{loc, comp.basis, comp.detectors, comp.observables, p});
            } else {
                auto &m = mechanisms[it->second];
                m.probability = m.probability * (1 - p) + p * (1 - m.probability);
                m.source = loc;
            }
        }
    });
    std::sort(mechanisms.begin(), mechanisms.end(), [](const FaultMechanism &a, const FaultMechanism &b) {
        if (a.basis != b.basis) return a.basis < b.basis;
        if (a.detectors != b.detectors) return a.detectors < b.detectors;
        return a.observables < b.observables;
    });
    return mechanisms;
}

std::vector<FaultMechanism> extract_dem(const Circuit &circuit) { return extract_dem(CompiledCircuit(circuit)); }

}  // namespace fractalshor
