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

#ifndef FRACTALSHOR_CIRCUIT_HPP
#define FRACTALSHOR_CIRCUIT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fractalshor {

enum class Basis : std::uint8_t { X, Z };

char basis_char(Basis b);

enum class GateKind : std::uint8_t {
    RX,
    RZ,
    MX,
    MZ,
    MXX,
    MZZ,
    IDLE,
    XERR,
    ZERR,
    DEP1,
    DEP2,
};

std::string_view gate_name(GateKind kind);
std::optional<GateKind> gate_from_name(std::string_view name);

bool is_noise(GateKind kind);
bool is_measurement(GateKind kind);
bool is_reset(GateKind kind);
/// MXX, MZZ and DEP2 act on consecutive target pairs.
bool is_pairwise(GateKind kind);
int group_size(GateKind kind);
/// Basis of the Pauli observable a measurement or reset acts in.
Basis gate_basis(GateKind kind);

struct Instruction {
    GateKind kind;
    std::vector<std::uint32_t> targets;
    /// Channel strength for noise kinds; result flip probability for
    /// measurements. Empty means "not annotated".
    std::optional<double> probability;

    std::size_t num_groups() const { return targets.size() / group_size(kind); }
    bool operator==(const Instruction &) const = default;
};

struct Layer {
    std::vector<Instruction> instructions;
    bool operator==(const Layer &) const = default;
};

struct DetectorCoords {
    int x = 0;
    int y = 0;
    int t = 0;
    Basis basis = Basis::X;
    bool operator==(const DetectorCoords &) const = default;
};

/// Parity of measurement records. Records are stored as absolute indices into
/// the circuit's measurement record; the text form uses lookbacks.
struct Detector {
    std::vector<std::int64_t> records;
    DetectorCoords coords;
    /// Declared after the instructions of this layer.
    std::size_t layer = 0;
    bool operator==(const Detector &) const = default;
};

struct ObservableInclude {
    std::uint32_t id = 0;
    std::vector<std::int64_t> records;
    std::size_t layer = 0;
    bool operator==(const ObservableInclude &) const = default;
};

struct QubitCoord {
    std::uint32_t qubit;
    int row;
    int col;
    bool operator==(const QubitCoord &) const = default;
};

/// Where a measurement record came from.
struct RecordSource {
    std::size_t layer;
    std::size_t instruction;
    std::size_t group;
};

struct ValidationReport {
    bool ok = true;
    std::string message;
    std::optional<std::size_t> layer;
    std::optional<std::uint32_t> qubit;
};

class ParseError : public std::runtime_error {
   public:
    ParseError(std::size_t line, const std::string &what);
    std::size_t line;
};

class ValidationError : public std::runtime_error {
   public:
    explicit ValidationError(const ValidationReport &report);
    ValidationReport report;
};

struct Circuit {
    std::vector<QubitCoord> qubit_coords;
    std::vector<Layer> layers;
    std::vector<Detector> detectors;
    std::vector<ObservableInclude> observables;
    std::map<std::string, std::string> meta;

    std::uint32_t num_qubits() const;
    std::size_t num_measurements() const;
    std::size_t num_detectors() const { return detectors.size(); }
    /// One more than the largest observable id, or 0.
    std::size_t num_observables() const;

    /// Source location of every measurement record, in record order.
    std::vector<RecordSource> record_sources() const;
    /// Measurement count through the end of each layer.
    std::vector<std::size_t> measurements_through_layer() const;
    /// Merged record list of each observable id (records included an even
    /// number of times cancel).
    std::vector<std::vector<std::int64_t>> observable_records() const;

    /// Number of target groups of a given kind across all layers.
    std::size_t count(GateKind kind) const;
    bool has_noise() const;

    std::string serialize() const;
    static Circuit parse(std::string_view text);

    bool operator==(const Circuit &) const = default;
};

ValidationReport validate(const Circuit &circuit);
/// Throws ValidationError if validate() fails.
void require_valid(const Circuit &circuit);

Circuit read_circuit_file(const std::string &path);
void write_circuit_file(const Circuit &circuit, const std::string &path);

std::string format_probability(double p);

}  // namespace fractalshor

#endif
