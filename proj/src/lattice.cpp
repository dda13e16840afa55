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

#include "fractalshor/lattice.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace fractalshor {

namespace {

std::int64_t checked_pow(std::int64_t base, int exponent) {
    std::int64_t result = 1;
    for (int k = 0; k < exponent; k++) {
        if (result > std::numeric_limits<std::int64_t>::max() / base) {
            throw std::overflow_error(
                "schedule period " + std::to_string(base) + "^" + std::to_string(exponent) + " overflows");
        }
        result *= base;
    }
    return result;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

int line_b(Orientation orientation, int index) {
    bool odd = (index & 1) != 0;
    if (orientation == Orientation::Vertical) {
        return odd ? 0 : 2;
    }
    return odd ? 1 : 3;
}

}  // namespace

LatticeSpec::LatticeSpec(int rows, int cols) : rows(rows), cols(cols) {
    if (rows < 2 || cols < 2) {
        throw std::invalid_argument(
            "lattice must be at least 2x2, got " + std::to_string(rows) + "x" + std::to_string(cols));
    }
}

std::pair<int, int> Edge::qubits(const LatticeSpec &lattice) const {
    if (orientation == Orientation::Horizontal) {
        return {lattice.qubit(position, index - 1), lattice.qubit(position, index)};
    }
    return {lattice.qubit(index - 1, position), lattice.qubit(index, position)};
}

ScheduleParams::ScheduleParams(std::optional<int> pitch, int hold) : pitch(pitch), hold(hold) {
    if (pitch.has_value() && (*pitch < 3 || *pitch % 2 == 0)) {
        throw std::invalid_argument("fractal pitch must be odd and >= 3, got " + std::to_string(*pitch));
    }
    if (hold < 1) {
        throw std::invalid_argument("hold factor must be >= 1, got " + std::to_string(hold));
    }
}

int interleave_b(const Edge &edge) {
    if (edge.index < 1) {
        throw std::invalid_argument("edge index must be >= 1");
    }
    return line_b(edge.orientation, edge.index);
}

int level(std::int64_t e, int pitch) {
    if (e < 1) {
        throw std::invalid_argument("level() is undefined for edge index " + std::to_string(e));
    }
    if (pitch < 2) {
        throw std::invalid_argument("level() needs pitch >= 2");
    }
    int k = 0;
    while (e % pitch == 0) {
        e /= pitch;
        k++;
    }
    return k;
}

std::int64_t line_period(Orientation, int index, const ScheduleParams &params) {
    if (index < 1) {
        throw std::invalid_argument("edge index must be >= 1");
    }
    int lvl = params.pitch ? level(index, *params.pitch) : 0;
    std::int64_t group = checked_pow(4 * static_cast<std::int64_t>(params.hold), lvl);
    if (group > std::numeric_limits<std::int64_t>::max() / 4) {
        throw std::overflow_error("schedule period overflows");
    }
    return 4 * group;
}

bool line_active(Orientation orientation, int index, std::int64_t t, const ScheduleParams &params) {
    if (index < 1) {
        throw std::invalid_argument("edge index must be >= 1");
    }
    if (t < 0) {
        throw std::invalid_argument("layer index must be >= 0");
    }
    int b = line_b(orientation, index);
    if (t % 4 != b) {
        return false;
    }
    int lvl = params.pitch ? level(index, *params.pitch) : 0;
    if (lvl == 0) {
        return true;
    }
    std::int64_t h = params.hold;
    std::int64_t group = checked_pow(4 * h, lvl);
    std::int64_t window = checked_pow(h, lvl);
    std::int64_t offset = b * ((group - 1) / (4 * h - 1));
    std::int64_t round = t / 4;
    return floor_mod(round - offset, group) < window;
}

bool edge_active(const Edge &edge, std::int64_t t, const ScheduleParams &params) {
    return line_active(edge.orientation, edge.index, t, params);
}

}  // namespace fractalshor
