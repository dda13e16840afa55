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

#ifndef FRACTALSHOR_LATTICE_HPP
#define FRACTALSHOR_LATTICE_HPP

#include <cstdint>
#include <optional>
#include <utility>

namespace fractalshor {

/// Rectangular grid of qubits. Qubit (r, c) has id r * cols + c.
struct LatticeSpec {
    int rows = 0;
    int cols = 0;

    LatticeSpec() = default;
    LatticeSpec(int rows, int cols);
    static LatticeSpec square(int diameter) { return LatticeSpec(diameter, diameter); }

    int num_qubits() const { return rows * cols; }
    int qubit(int r, int c) const { return r * cols + c; }
    bool operator==(const LatticeSpec &) const = default;
};

enum class Orientation : std::uint8_t {
    /// Joins (r, e-1) and (r, e). Measures XX.
    Horizontal,
    /// Joins (e-1, c) and (e, c). Measures ZZ.
    Vertical,
};

/// A gauge edge. `index` is the edge-column (Horizontal) or edge-row (Vertical),
/// starting at 1. `position` is the qubit row (Horizontal) or qubit column (Vertical).
struct Edge {
    Orientation orientation;
    int index;
    int position;

    std::pair<int, int> qubits(const LatticeSpec &lattice) const;
    bool operator==(const Edge &) const = default;
};

/// Fractal pitch (absent for plain Bacon-Shor) and hold factor.
struct ScheduleParams {
    std::optional<int> pitch;
    int hold = 1;

    ScheduleParams() = default;
    ScheduleParams(std::optional<int> pitch, int hold = 1);
    static ScheduleParams plain() { return ScheduleParams(); }
    bool operator==(const ScheduleParams &) const = default;
};

/// Layer slot (t mod 4) at which an edge may be measured.
int interleave_b(const Edge &edge);

/// Largest k such that pitch^k divides e. Throws for e < 1 or pitch < 2.
int level(std::int64_t e, int pitch);

/// Whether the edge is measured at circuit layer t under the fractal schedule.
/// With hold h and level L the edge is live for h^L consecutive rounds out of
/// every (4h)^L rounds, always at layer slot interleave_b(edge).
/// Throws std::overflow_error if (4h)^L does not fit in 64 bits.
bool edge_active(const Edge &edge, std::int64_t t, const ScheduleParams &params);

/// Same as edge_active, but for an edge-row/column identified only by
/// orientation and index (all positions on a line share a schedule).
bool line_active(Orientation orientation, int index, std::int64_t t, const ScheduleParams &params);

/// Period, in layers, of an edge line's activity pattern: 4 * (4h)^L.
std::int64_t line_period(Orientation orientation, int index, const ScheduleParams &params);

}  // namespace fractalshor

#endif
