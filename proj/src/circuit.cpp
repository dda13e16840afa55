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

#include "fractalshor/circuit.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fractalshor {

namespace {

constexpr std::array<std::string_view, 11> kGateNames = {
    "RX", "RZ", "MX", "MZ", "MXX", "MZZ", "IDLE", "XERR", "ZERR", "DEP1", "DEP2"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) {
            i++;
        }
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') {
            j++;
        }
        if (j > i) {
            out.push_back(s.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

template <typename T>
bool parse_int(std::string_view s, T &out) {
    if (s.empty()) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double &out) {
    if (s.empty()) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); i++) {
        if (i == s.size() || s[i] == ',') {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace

char basis_char(Basis b) { return b == Basis::X ? 'X' : 'Z'; }

std::string_view gate_name(GateKind kind) { return kGateNames[static_cast<std::size_t>(kind)]; }

std::optional<GateKind> gate_from_name(std::string_view name) {
    for (std::size_t k = 0; k < kGateNames.size(); k++) {
        if (kGateNames[k] == name) {
            return static_cast<GateKind>(k);
        }
    }
    return std::nullopt;
}

bool is_noise(GateKind kind) {
    return kind == GateKind::XERR || kind == GateKind::ZERR || kind == GateKind::DEP1 || kind == GateKind::DEP2;
}

bool is_measurement(GateKind kind) {
    return kind == GateKind::MX || kind == GateKind::MZ || kind == GateKind::MXX || kind == GateKind::MZZ;
}

bool is_reset(GateKind kind) { return kind == GateKind::RX || kind == GateKind::RZ; }

bool is_pairwise(GateKind kind) {
    return kind == GateKind::MXX || kind == GateKind::MZZ || kind == GateKind::DEP2;
}

int group_size(GateKind kind) { return is_pairwise(kind) ? 2 : 1; }

Basis gate_basis(GateKind kind) {
    switch (kind) {
        case GateKind::RX:
        case GateKind::MX:
        case GateKind::MXX:
            return Basis::X;
        case GateKind::RZ:
        case GateKind::MZ:
        case GateKind::MZZ:
            return Basis::Z;
        default:
            throw std::invalid_argument("gate " + std::string(gate_name(kind)) + " has no basis");
    }
}

ParseError::ParseError(std::size_t line, const std::string &what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}

ValidationError::ValidationError(const ValidationReport &report)
    : std::runtime_error("invalid circuit: " + report.message), report(report) {}

std::uint32_t Circuit::num_qubits() const {
    std::uint32_t n = 0;
    for (const auto &c : qubit_coords) {
        n = std::max(n, c.qubit + 1);
    }
    for (const auto &layer : layers) {
        for (const auto &inst : layer.instructions) {
            for (auto t : inst.targets) {
                n = std::max(n, t + 1);
            }
        }
    }
    return n;
}

std::size_t Circuit::num_measurements() const {
    std::size_t n = 0;
    for (const auto &layer : layers) {
        for (const auto &inst : layer.instructions) {
            if (is_measurement(inst.kind)) {
                n += inst.num_groups();
            }
        }
    }
    return n;
}

std::size_t Circuit::num_observables() const {
    std::size_t n = 0;
    for (const auto &obs : observables) {
        n = std::max<std::size_t>(n, obs.id + 1);
    }
    return n;
}

std::vector<RecordSource> Circuit::record_sources() const {
    std::vector<RecordSource> out;
    for (std::size_t l = 0; l < layers.size(); l++) {
        const auto &insts = layers[l].instructions;
        for (std::size_t i = 0; i < insts.size(); i++) {
            if (is_measurement(insts[i].kind)) {
                for (std::size_t g = 0; g < insts[i].num_groups(); g++) {
                    out.push_back({l, i, g});
                }
            }
        }
    }
    return out;
}

std::vector<std::size_t> Circuit::measurements_through_layer() const {
    std::vector<std::size_t> out;
    out.reserve(layers.size());
    std::size_t n = 0;
    for (const auto &layer : layers) {
        for (const auto &inst : layer.instructions) {
            if (is_measurement(inst.kind)) {
                n += inst.num_groups();
            }
        }
        out.push_back(n);
    }
    return out;
}

std::vector<std::vector<std::int64_t>> Circuit::observable_records() const {
    std::vector<std::vector<std::int64_t>> out(num_observables());
    for (const auto &obs : observables) {
        auto &dst = out[obs.id];
        for (auto r : obs.records) {
            auto it = std::find(dst.begin(), dst.end(), r);
            if (it == dst.end()) {
                dst.push_back(r);
            } else {
                dst.erase(it);
            }
        }
    }
    for (auto &v : out) {
        std::sort(v.begin(), v.end());
    }
    return out;
}

std::size_t Circuit::count(GateKind kind) const {
    std::size_t n = 0;
    for (const auto &layer : layers) {
        for (const auto &inst : layer.instructions) {
            if (inst.kind == kind) {
                n += inst.num_groups();
            }
        }
    }
    return n;
}

bool Circuit::has_noise() const {
    for (const auto &layer : layers) {
        for (const auto &inst : layer.instructions) {
            if (is_noise(inst.kind) || (is_measurement(inst.kind) && inst.probability.has_value())) {
                return true;
            }
        }
    }
    return false;
}

std::string format_probability(double p) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), p);
    return std::string(buf, res.ptr);
}

std::string Circuit::serialize() const {
    std::ostringstream out;
    for (const auto &[key, value] : meta) {
        out << "# meta " << key << "=" << value << "\n";
    }
    for (const auto &c : qubit_coords) {
        out << "QUBIT(" << c.row << "," << c.col << ") " << c.qubit << "\n";
    }
    auto through = measurements_through_layer();
    std::size_t next_det = 0;
    std::size_t next_obs = 0;
    for (std::size_t l = 0; l < layers.size(); l++) {
        if (l > 0) {
            out << "TICK\n";
        }
        for (const auto &inst : layers[l].instructions) {
            out << gate_name(inst.kind);
            if (inst.probability.has_value()) {
                out << "(" << format_probability(*inst.probability) << ")";
            }
            for (auto t : inst.targets) {
                out << " " << t;
            }
            out << "\n";
        }
        auto m = static_cast<std::int64_t>(through[l]);
        while (next_det < detectors.size() && detectors[next_det].layer == l) {
            const auto &d = detectors[next_det++];
            out << "DETECTOR(" << d.coords.x << "," << d.coords.y << "," << d.coords.t << ","
                << basis_char(d.coords.basis) << ")";
            for (auto r : d.records) {
                out << " rec[" << (r - m) << "]";
            }
            out << "\n";
        }
        while (next_obs < observables.size() && observables[next_obs].layer == l) {
            const auto &o = observables[next_obs++];
            out << "OBSERVABLE(" << o.id << ")";
            for (auto r : o.records) {
                out << " rec[" << (r - m) << "]";
            }
            out << "\n";
        }
    }
    return out.str();
}

Circuit Circuit::parse(std::string_view text) {
    Circuit c;
    bool need_layer = true;
    std::int64_t measured = 0;
    std::size_t line_no = 0;

    auto current_layer = [&]() -> std::size_t {
        if (need_layer) {
            c.layers.emplace_back();
            need_layer = false;
        }
        return c.layers.size() - 1;
    };

    auto parse_records = [&](const std::vector<std::string_view> &tokens, std::size_t first) {
        std::vector<std::int64_t> recs;
        for (std::size_t k = first; k < tokens.size(); k++) {
            auto tok = tokens[k];
            std::int64_t lookback = 0;
            if (tok.size() < 6 || tok.substr(0, 4) != "rec[" || tok.back() != ']' ||
                !parse_int(tok.substr(4, tok.size() - 5), lookback) || lookback >= 0) {
                throw ParseError(line_no, "malformed record reference '" + std::string(tok) + "'");
            }
            recs.push_back(measured + lookback);
        }
        return recs;
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        line_no++;

        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        if (line.front() == '#') {
            auto body = trim(line.substr(1));
            if (body.substr(0, 5) == "meta ") {
                auto kv = trim(body.substr(5));
                auto eq = kv.find('=');
                if (eq != std::string_view::npos) {
                    c.meta[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
                }
            }
            continue;
        }
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = trim(line.substr(0, hash));
        }

        auto tokens = split_ws(line);
        std::string_view head = tokens[0];
        std::string_view name = head;
        std::optional<std::string_view> args;
        if (auto paren = head.find('('); paren != std::string_view::npos) {
            if (head.back() != ')') {
                throw ParseError(line_no, "unterminated argument list in '" + std::string(head) + "'");
            }
            name = head.substr(0, paren);
            args = head.substr(paren + 1, head.size() - paren - 2);
        }

        if (name == "TICK") {
            if (args || tokens.size() != 1) {
                throw ParseError(line_no, "TICK takes no arguments");
            }
            current_layer();
            need_layer = true;
            continue;
        }
        if (name == "QUBIT") {
            auto parts = args ? split_commas(*args) : std::vector<std::string_view>{};
            QubitCoord qc{};
            if (parts.size() != 2 || tokens.size() != 2 || !parse_int(parts[0], qc.row) ||
                !parse_int(parts[1], qc.col) || !parse_int(tokens[1], qc.qubit)) {
                throw ParseError(line_no, "expected QUBIT(r,c) q");
            }
            c.qubit_coords.push_back(qc);
            continue;
        }
        if (name == "DETECTOR") {
            auto parts = args ? split_commas(*args) : std::vector<std::string_view>{};
            Detector d;
            if (parts.size() != 4 || !parse_int(parts[0], d.coords.x) || !parse_int(parts[1], d.coords.y) ||
                !parse_int(parts[2], d.coords.t) || (parts[3] != "X" && parts[3] != "Z")) {
                throw ParseError(line_no, "expected DETECTOR(x,y,t,X|Z)");
            }
            d.coords.basis = parts[3] == "X" ? Basis::X : Basis::Z;
            d.records = parse_records(tokens, 1);
            if (d.records.empty()) {
                throw ParseError(line_no, "DETECTOR needs at least one record");
            }
            d.layer = current_layer();
            c.detectors.push_back(std::move(d));
            continue;
        }
        if (name == "OBSERVABLE") {
            ObservableInclude o;
            if (!args || !parse_int(trim(*args), o.id)) {
                throw ParseError(line_no, "expected OBSERVABLE(id)");
            }
            o.records = parse_records(tokens, 1);
            o.layer = current_layer();
            c.observables.push_back(std::move(o));
            continue;
        }

        auto kind = gate_from_name(name);
        if (!kind) {
            throw ParseError(line_no, "unknown keyword '" + std::string(name) + "'");
        }
        Instruction inst{*kind, {}, std::nullopt};
        if (args) {
            double p = 0;
            if (!parse_double(trim(*args), p)) {
                throw ParseError(line_no, "malformed probability '" + std::string(*args) + "'");
            }
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ParseError(line_no, "probability outside [0,1]: " + std::string(*args));
            }
            if (!is_noise(*kind) && !is_measurement(*kind)) {
                throw ParseError(line_no, std::string(name) + " takes no probability");
            }
            inst.probability = p;
        } else if (is_noise(*kind)) {
            throw ParseError(line_no, std::string(name) + " needs a probability");
        }
        for (std::size_t k = 1; k < tokens.size(); k++) {
            std::uint32_t q = 0;
            if (!parse_int(tokens[k], q)) {
                throw ParseError(line_no, "malformed qubit target '" + std::string(tokens[k]) + "'");
            }
            inst.targets.push_back(q);
        }
        if (is_pairwise(*kind) && inst.targets.size() % 2 != 0) {
            throw ParseError(line_no, std::string(name) + " needs an even number of targets");
        }
        if (is_measurement(*kind)) {
            measured += static_cast<std::int64_t>(inst.num_groups());
        }
        c.layers[current_layer()].instructions.push_back(std::move(inst));
    }
    if (need_layer && !c.layers.empty()) {
        c.layers.emplace_back();
    }
    return c;
}

ValidationReport validate(const Circuit &circuit) {
    auto fail = [](std::string msg, std::optional<std::size_t> layer = std::nullopt,
                   std::optional<std::uint32_t> qubit = std::nullopt) {
        return ValidationReport{false, std::move(msg), layer, qubit};
    };
    std::uint32_t n = circuit.num_qubits();
    std::vector<std::size_t> last_use(n, SIZE_MAX);
    for (std::size_t l = 0; l < circuit.layers.size(); l++) {
        for (const auto &inst : circuit.layers[l].instructions) {
            if (is_pairwise(inst.kind) && inst.targets.size() % 2 != 0) {
                return fail(std::string(gate_name(inst.kind)) + " has an odd number of targets", l);
            }
            if (is_noise(inst.kind) && !inst.probability.has_value()) {
                return fail(std::string(gate_name(inst.kind)) + " is missing its probability", l);
            }
            if (inst.probability && !(*inst.probability >= 0.0 && *inst.probability <= 1.0)) {
                return fail("probability outside [0,1]", l);
            }
            if (is_pairwise(inst.kind)) {
                for (std::size_t k = 0; k < inst.targets.size(); k += 2) {
                    if (inst.targets[k] == inst.targets[k + 1]) {
                        return fail("pair targets the same qubit twice", l, inst.targets[k]);
                    }
                }
            }
            if (is_noise(inst.kind)) {
                continue;
            }
            for (auto q : inst.targets) {
                if (last_use[q] == l) {
                    return fail("qubit " + std::to_string(q) + " used twice in layer " + std::to_string(l), l, q);
                }
                last_use[q] = l;
            }
        }
    }

    auto through = circuit.measurements_through_layer();
    auto check_refs = [&](const std::vector<std::int64_t> &recs, std::size_t layer,
                          const std::string &what) -> std::optional<ValidationReport> {
        if (layer >= circuit.layers.size()) {
            return fail(what + " declared after the last layer", layer);
        }
        for (auto r : recs) {
            if (r < 0 || r >= static_cast<std::int64_t>(through[layer])) {
                return fail(what + " has a dangling record reference", layer);
            }
        }
        return std::nullopt;
    };
    std::size_t prev_layer = 0;
    for (std::size_t k = 0; k < circuit.detectors.size(); k++) {
        const auto &d = circuit.detectors[k];
        if (d.records.empty()) {
            return fail("detector " + std::to_string(k) + " has no records", d.layer);
        }
        if (d.layer < prev_layer) {
            return fail("detectors are not in layer order", d.layer);
        }
        prev_layer = d.layer;
        if (auto r = check_refs(d.records, d.layer, "detector " + std::to_string(k))) {
            return *r;
        }
    }
    prev_layer = 0;
    for (const auto &o : circuit.observables) {
        if (o.layer < prev_layer) {
            return fail("observables are not in layer order", o.layer);
        }
        prev_layer = o.layer;
        if (auto r = check_refs(o.records, o.layer, "observable " + std::to_string(o.id))) {
            return *r;
        }
    }
    return {};
}

void require_valid(const Circuit &circuit) {
    auto report = validate(circuit);
    if (!report.ok) {
        throw ValidationError(report);
    }
}

Circuit read_circuit_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open circuit file " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return Circuit::parse(buf.str());
}

void write_circuit_file(const Circuit &circuit, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write circuit file " + path);
    }
    out << circuit.serialize();
}

}  // namespace fractalshor
