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

#include "fractalshor/noise.hpp"

#include <stdexcept>
#include <string>

namespace fractalshor {

NoiseModel::NoiseModel(double p) : p(p) {
    if (!(p >= 0.0 && p <= 0.5)) {
        throw std::invalid_argument("noise strength must be in [0, 0.5], got " + format_probability(p));
    }
}

Circuit apply_noise(const Circuit &circuit, const NoiseModel &model) {
    if (circuit.has_noise()) {
        throw std::invalid_argument("circuit already contains noise; refusing to apply it twice");
    }
    const double p = model.p;
    Circuit out = circuit;
    for (auto &layer : out.layers) {
        std::vector<Instruction> noisy;
        noisy.reserve(layer.instructions.size() * 2);
        for (const auto &inst : layer.instructions) {
            Instruction gate = inst;
            std::optional<GateKind> channel;
            switch (inst.kind) {
                case GateKind::IDLE:
                case GateKind::MX:
                case GateKind::MZ:
                    channel = GateKind::DEP1;
                    break;
                case GateKind::RX:
                    channel = GateKind::ZERR;
                    break;
                case GateKind::RZ:
                    channel = GateKind::XERR;
                    break;
                case GateKind::MXX:
                case GateKind::MZZ:
                    channel = GateKind::DEP2;
                    break;
                default:
                    throw std::logic_error("unexpected noise instruction");
            }
            if (is_measurement(inst.kind)) {
                gate.probability = p;
            }
            noisy.push_back(std::move(gate));
            noisy.push_back(Instruction{*channel, inst.targets, p});
        }
        layer.instructions = std::move(noisy);
    }
    out.meta["noise_p"] = format_probability(p);
    out.meta["noise_transversal_layers"] = "included";
    return out;
}

}  // namespace fractalshor
