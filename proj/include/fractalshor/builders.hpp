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

#ifndef FRACTALSHOR_BUILDERS_HPP
#define FRACTALSHOR_BUILDERS_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "fractalshor/circuit.hpp"
#include "fractalshor/lattice.hpp"

namespace fractalshor {

struct MemoryExperimentSpec {
    LatticeSpec lattice;
    ScheduleParams schedule;
    Basis basis = Basis::X;
    int rounds = 0;
};

/// Two d x d patches side by side joined by an XX seam (horizontal edge-column d).
struct SurgeryExperimentSpec {
    int distance = 5;
    int rounds_before = 1;
    int rounds_during = 3;
    int rounds_after = 1;
    Basis basis = Basis::X;
    /// Number of back-to-back surgery blocks between the transversal init and measurement.
    int blocks = 1;
};

/// Decides whether an edge is measured at schedule time t (t = circuit layer - 1).
using EdgeSchedule = std::function<bool(const Edge &, std::int64_t)>;

/// Union-find over the edges of one measured line. Every perpendicular edge
/// that touches the line and is active strictly between prev_t and cur_t joins
/// the two line edges it overlaps. prev_t = -1 stands for the transversal reset.
/// Returns the position sets, each becoming one detector.
std::vector<std::vector<int>> derive_detector_sets(
    const LatticeSpec &lattice,
    Orientation orientation,
    int index,
    std::int64_t prev_t,
    std::int64_t cur_t,
    const EdgeSchedule &schedule);

/// Transversal reset, `rounds` rounds of scheduled pair measurements, transversal
/// measurement, with detectors from derive_detector_sets. Adds no observables.
Circuit build_scheduled(const LatticeSpec &lattice, const EdgeSchedule &schedule, Basis basis, int rounds);

Circuit build_memory(const MemoryExperimentSpec &spec);
Circuit build_surgery(const SurgeryExperimentSpec &spec);

/// Column (basis X) or row (basis Z) of qubits whose final measurements form a logical.
std::vector<std::uint32_t> logical_support(const LatticeSpec &lattice, Basis basis, int line);

}  // namespace fractalshor

#endif
