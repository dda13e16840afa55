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

#ifndef FRACTALSHOR_TABLEAU_HPP
#define FRACTALSHOR_TABLEAU_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "fractalshor/circuit.hpp"
#include "fractalshor/frame_sim.hpp"

namespace fractalshor {

/// i^phase * X^x * Z^z on up to 32 qubits.
struct PauliString {
    std::uint32_t x = 0;
    std::uint32_t z = 0;
    std::uint8_t phase = 0;

    bool commutes(const PauliString &other) const;
    PauliString operator*(const PauliString &other) const;
    bool operator==(const PauliString &) const = default;
};

/// Exact pure-state stabilizer simulator that keeps only the generator list and
/// solves for deterministic outcomes by Gaussian elimination. Slow and simple;
/// meant as an oracle for small circuits.
class TableauSimulator {
   public:
    static constexpr std::uint32_t kMaxQubits = 32;

    TableauSimulator(std::uint32_t num_qubits, std::uint64_t seed);

    /// Measures a Hermitian Pauli (phase 0 or 2). Returns 1 for the -1 eigenvalue.
    std::uint8_t measure(const PauliString &observable);
    /// Whether measuring `observable` now would give a fixed result.
    bool is_deterministic(const PauliString &observable) const;
    void reset(std::uint32_t qubit, Basis basis);
    void apply(const PauliString &pauli);

    std::uint32_t num_qubits() const { return n_; }

   private:
    std::uint8_t deterministic_value(const PauliString &observable) const;

    std::uint32_t n_;
    std::vector<PauliString> generators_;
    std::mt19937_64 rng_;
};

/// Measurement record of one run of the circuit on the exact simulator, with
/// the listed faults injected and all other noise ignored.
std::vector<std::uint8_t> tableau_records(const CompiledCircuit &circuit, std::uint64_t seed,
                                          const std::vector<FaultLocation> &faults);

/// Detector/observable values implied by a record.
Symptom tableau_symptom_of_records(const CompiledCircuit &circuit, const std::vector<std::uint8_t> &records);

/// Symptom of a lone fault: faulty run XOR noiseless run.
Symptom tableau_fault_symptom(const CompiledCircuit &circuit, const FaultLocation &fault, std::uint64_t seed = 1);

/// Runs the noiseless circuit `trials` times with different measurement
/// randomness and reports whether every detector and observable was constant
/// (and detectors were always 0).
bool tableau_deterministic(const CompiledCircuit &circuit, int trials, std::uint64_t seed);

/// Independent Monte-Carlo sampler: draws every channel per shot with its own
/// RNG and runs the exact simulator. Observable bits are flips relative to a
/// noiseless run.
SyndromeBatch tableau_sample(const CompiledCircuit &circuit, std::size_t shots, std::uint64_t seed);

}  // namespace fractalshor

#endif
