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

#ifndef FRACTALSHOR_NOISE_HPP
#define FRACTALSHOR_NOISE_HPP

#include "fractalshor/circuit.hpp"

namespace fractalshor {

/// Uniform circuit noise of strength p.
struct NoiseModel {
    double p = 0;

    explicit NoiseModel(double p);
};

/// Rewrites every gate into its noisy form:
///   IDLE      -> IDLE, DEP1(p)
///   RX / RZ   -> RX, ZERR(p) / RZ, XERR(p)
///   MX / MZ   -> MX(p), DEP1(p)
///   MXX / MZZ -> MXX(p), DEP2(p)
/// Throws if the circuit already carries noise.
Circuit apply_noise(const Circuit &circuit, const NoiseModel &model);

}  // namespace fractalshor

#endif
