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

#ifndef FRACTALSHOR_FRAME_SIM_HPP
#define FRACTALSHOR_FRAME_SIM_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fractalshor/circuit.hpp"

namespace fractalshor {

/// Single-qubit Pauli codes, ordered I, X, Y, Z.
enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline bool pauli_x(Pauli p) { return p == Pauli::X || p == Pauli::Y; }
inline bool pauli_z(Pauli p) { return p == Pauli::Z || p == Pauli::Y; }

struct CompiledOp {
    GateKind kind;
    double probability;  // 0 when not annotated
    bool annotated;      // measurement carries a flip probability / noise channel
    std::uint32_t target_begin;
    std::uint32_t target_end;
    std::uint32_t record_begin;  // first record produced (measurements only)
    std::uint32_t layer;

    std::uint32_t num_groups() const { return (target_end - target_begin) / group_size(kind); }
};

/// Flattened, validated form of a circuit used by the simulators.
/// Instruction indices everywhere below refer to positions in `ops`
/// (layer-major order).
struct CompiledCircuit {
    explicit CompiledCircuit(const Circuit &circuit);

    std::uint32_t num_qubits = 0;
    std::uint32_t num_records = 0;
    std::uint32_t num_detectors = 0;
    std::uint32_t num_observables = 0;
    std::vector<CompiledOp> ops;
    std::vector<std::uint32_t> targets;
    /// CSR lists of record indices per detector / observable.
    std::vector<std::uint32_t> det_offsets;
    std::vector<std::uint32_t> det_records;
    std::vector<std::uint32_t> obs_offsets;
    std::vector<std::uint32_t> obs_records;
    std::vector<Basis> det_basis;
    std::vector<Basis> obs_basis;

    std::span<const std::uint32_t> op_targets(std::size_t op) const {
        return {targets.data() + ops[op].target_begin, targets.data() + ops[op].target_end};
    }
};

/// Number of distinct non-trivial outcomes a fault at this op can have
/// (0 if the op is noiseless).
int num_fault_outcomes(const CompiledOp &op);
/// Probability of one specific outcome.
double fault_outcome_probability(const CompiledOp &op);
/// Pauli placed on each target of the group by a noise outcome (1-based).
std::pair<Pauli, Pauli> fault_outcome_paulis(GateKind kind, int outcome);

/// One specific outcome of one channel: a Pauli from a noise instruction, or a
/// result flip of an annotated measurement.
struct FaultLocation {
    std::size_t instruction = 0;
    std::size_t group = 0;
    int outcome = 1;
    bool operator==(const FaultLocation &) const = default;
};

struct Symptom {
    std::vector<std::uint32_t> detectors;
    std::vector<std::uint32_t> observables;
    bool empty() const { return detectors.empty() && observables.empty(); }
    bool operator==(const Symptom &) const = default;
};

Symptom symptom_xor(const Symptom &a, const Symptom &b);

/// Detection events and observable flips, shot-major bit rows padded to 64 bits.
class SyndromeBatch {
   public:
    SyndromeBatch() = default;
    SyndromeBatch(std::size_t shots, std::size_t num_detectors, std::size_t num_observables);

    std::size_t shots() const { return shots_; }
    std::size_t num_detectors() const { return num_detectors_; }
    std::size_t num_observables() const { return num_observables_; }

    bool detector(std::size_t shot, std::size_t det) const;
    bool observable(std::size_t shot, std::size_t obs) const;
    void set_detector(std::size_t shot, std::size_t det, bool value);
    void set_observable(std::size_t shot, std::size_t obs, bool value);
    std::span<const std::uint64_t> detector_row(std::size_t shot) const;
    std::span<std::uint64_t> detector_row(std::size_t shot);
    std::span<const std::uint64_t> observable_row(std::size_t shot) const;
    std::span<std::uint64_t> observable_row(std::size_t shot);
    std::vector<std::uint32_t> fired_detectors(std::size_t shot) const;
    /// Observable flips as a bit mask (first 64 observables).
    std::uint64_t observable_mask(std::size_t shot) const;

    /// Binary form: "FSB1", u32 shots, u32 detectors, u32 observables (little
    /// endian), then the detector matrix and the observable matrix, each row
    /// padded to a whole byte, bit k of a row stored at byte k/8, bit k%8.
    void write_binary(std::ostream &out) const;
    static SyndromeBatch read_binary(std::istream &in);
    /// Debug text, one line per shot: "shot 17: D3 D9 L0".
    void write_text(std::ostream &out) const;

    bool operator==(const SyndromeBatch &) const = default;

   private:
    std::size_t shots_ = 0;
    std::size_t num_detectors_ = 0;
    std::size_t num_observables_ = 0;
    std::size_t det_stride_ = 0;
    std::size_t obs_stride_ = 0;
    std::vector<std::uint64_t> det_bits_;
    std::vector<std::uint64_t> obs_bits_;
};

struct SampleOptions {
    std::size_t batch_size = 1024;
    /// 0 means use the OpenMP default.
    int threads = 0;
    /// Multiply a random element of each measured/reset observable into the
    /// frame after every measurement and reset. Detectors and observables that
    /// are not deterministic then fire with probability 1/2.
    bool gauge_randomize = false;
};

/// Monte-Carlo sample of a noisy circuit. Batches are seeded independently from
/// (seed, batch index), so the result only depends on seed and batch size.
SyndromeBatch sample(const CompiledCircuit &circuit, std::size_t shots, std::uint64_t seed,
                     const SampleOptions &options = {});
SyndromeBatch sample(const Circuit &circuit, std::size_t shots, std::uint64_t seed,
                     const SampleOptions &options = {});

/// One batch through the bit-packed kernel (64 shots per word).
SyndromeBatch sample_batch_packed(const CompiledCircuit &circuit, std::size_t batch_index, std::size_t shots,
                                  std::uint64_t seed, bool gauge_randomize = false);
/// The same batch through the scalar one-shot-at-a-time reference kernel.
/// Bit-identical to sample_batch_packed.
SyndromeBatch sample_batch_reference(const CompiledCircuit &circuit, std::size_t batch_index, std::size_t shots,
                                     std::uint64_t seed, bool gauge_randomize = false);

/// Symptom of a lone fault in an otherwise noiseless circuit (forward frame propagation).
Symptom propagate_fault(const CompiledCircuit &circuit, const FaultLocation &fault);
Symptom propagate_fault(const Circuit &circuit, const FaultLocation &fault);

/// Calls `visit` for every fault outcome of every noisy op, in reverse op order, with
/// its probability and symptom. Computed by a single backward sensitivity pass.
void for_each_fault(const CompiledCircuit &circuit,
                    const std::function<void(const FaultLocation &, double, const Symptom &)> &visit);

/// One graphlike error mechanism: one basis component of a fault's symptom.
struct FaultMechanism {
    FaultLocation source;  // first contributing fault
    Basis basis = Basis::X;
    std::vector<std::uint32_t> detectors;  // at most 2
    std::uint64_t observables = 0;         // bit mask
    double probability = 0;
    bool operator==(const FaultMechanism &) const = default;
};

class NonGraphlikeError : public std::runtime_error {
   public:
    NonGraphlikeError(const FaultLocation &fault, const std::string &what);
    FaultLocation fault;
};

/// Splits a symptom into per-basis components. Observables go with the
/// component of their own basis.
struct SymptomComponent {
    Basis basis;
    std::vector<std::uint32_t> detectors;
    std::uint64_t observables;
};
std::vector<SymptomComponent> decompose_symptom(const CompiledCircuit &circuit, const Symptom &symptom);

/// Deduplicated detector error model. Identical (basis, detectors,
/// observables) components are merged with p = p1(1-p2) + p2(1-p1).
/// Throws NonGraphlikeError if a component touches 3 or more detectors.
std::vector<FaultMechanism> extract_dem(const CompiledCircuit &circuit);
std::vector<FaultMechanism> extract_dem(const Circuit &circuit);

}  // namespace fractalshor

#endif
