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

#include "fractalshor/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fractalshor/decoder.hpp"
#include "fractalshor/frame_sim.hpp"
#include "fractalshor/noise.hpp"
#include "json.hpp"

namespace fractalshor {

bool StatsRecord::same_config(const StatsRecord &o) const {
    return id == o.id && diameter == o.diameter && pitch == o.pitch && hold == o.hold && basis == o.basis &&
           p == o.p && rounds == o.rounds;
}

namespace {

std::string meta_or(const Circuit &c, const std::string &key, const std::string &fallback) {
    auto it = c.meta.find(key);
    return it == c.meta.end() ? fallback : it->second;
}

}  // namespace

StatsRecord run_until(const Circuit &circuit, double p, std::uint64_t seed, const RunOptions &options) {
    if (options.max_shots < 1 || options.max_errors < 1 || options.batch_size < 1) {
        throw std::invalid_argument("run_until: max_shots, max_errors and batch_size must be positive");
    }
    Circuit noisy = apply_noise(circuit, NoiseModel(p));
    CompiledCircuit cc(noisy);
    return run_decoded(noisy, build_graph(cc), seed, options);
}

StatsRecord run_decoded(const Circuit &circuit, const DecodingGraph &graph, std::uint64_t seed,
                        const RunOptions &options) {
    if (options.max_shots < 1 || options.max_errors < 1 || options.batch_size < 1) {
        throw std::invalid_argument("run_until: max_shots, max_errors and batch_size must be positive");
    }
    auto start = std::chrono::steady_clock::now();
    CompiledCircuit cc(circuit);
    if (graph.num_detectors() != cc.num_detectors || graph.num_observables() != cc.num_observables) {
        throw std::invalid_argument("decoding graph does not match the circuit");
    }
    const double p = std::stod(meta_or(circuit, "noise_p", "0"));

    StatsRecord rec;
    rec.id = meta_or(circuit, "experiment", "custom");
    rec.diameter = std::stoi(meta_or(circuit, "diameter", "0"));
    std::string pitch = meta_or(circuit, "pitch", "none");
    if (pitch != "none") rec.pitch = std::stoi(pitch);
    rec.hold = std::stoi(meta_or(circuit, "hold", "1"));
    rec.basis = meta_or(circuit, "basis", "X") == "Z" ? Basis::Z : Basis::X;
    rec.p = p;
    rec.rounds = std::stoi(meta_or(circuit, "rounds", "0"));
    rec.seed = seed;
    rec.observable_errors.assign(cc.num_observables, 0);

    struct BatchResult {
        std::uint64_t shots = 0;
        std::uint64_t errors = 0;
        std::vector<std::uint64_t> observable_errors;
    };
    const std::size_t bs = options.batch_size;
    const std::uint64_t num_batches = (options.max_shots + bs - 1) / bs;
    const int nthreads = options.threads > 0 ? options.threads : omp_get_max_threads();
    // A wave is a group of consecutive batches processed concurrently. Results
    // are folded in batch order, so the wave size only affects speed.
    const std::uint64_t wave = static_cast<std::uint64_t>(std::max(1, nthreads)) * 2;
    bool done = false;
    for (std::uint64_t first = 0; first < num_batches && !done; first += wave) {
        const std::uint64_t count = std::min(wave, num_batches - first);
        std::vector<BatchResult> results(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); i++) {
            std::uint64_t b = first + static_cast<std::uint64_t>(i);
            std::uint64_t shots = std::min<std::uint64_t>(bs, options.max_shots - b * bs);
            SyndromeBatch batch = sample_batch_packed(cc, b, shots, seed);
            auto &r = results[i];
            r.shots = shots;
            r.observable_errors.assign(cc.num_observables, 0);
            for (std::size_t s = 0; s < shots; s++) {
                auto fired = batch.fired_detectors(s);
                std::uint64_t diff = predict_shot(graph, fired) ^ batch.observable_mask(s);
                if (diff) r.errors++;
                for (std::uint32_t k = 0; k < cc.num_observables; k++) r.observable_errors[k] += (diff >> k) & 1;
            }
        }
        for (const auto &r : results) {
            rec.shots += r.shots;
            rec.errors += r.errors;
            for (std::size_t k = 0; k < r.observable_errors.size(); k++) rec.observable_errors[k] += r.observable_errors[k];
            if (rec.errors >= options.max_errors || rec.shots >= options.max_shots) {
                done = true;
                break;
            }
        }
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

StatsRecord accumulate(const StatsRecord &a, const StatsRecord &b) {
    if (!a.same_config(b)) {
        throw std::invalid_argument("accumulate: records have different configurations");
    }
    StatsRecord out = a;
    out.shots += b.shots;
    out.errors += b.errors;
    out.seconds += b.seconds;
    if (out.observable_errors.size() < b.observable_errors.size()) out.observable_errors.resize(b.observable_errors.size(), 0);
    for (std::size_t k = 0; k < b.observable_errors.size(); k++) out.observable_errors[k] += b.observable_errors[k];
    return out;
}

double per_round_rate(double p_shot, int rounds) {
    if (!(p_shot >= 0 && p_shot <= 0.5)) throw std::invalid_argument("per_round_rate: p_shot must lie in [0, 0.5]");
    if (rounds < 1) throw std::invalid_argument("per_round_rate: rounds must be positive");
    if (p_shot == 0.5) return 0.5;
    return -std::expm1(std::log1p(-2 * p_shot) / rounds) / 2;
}

double combine_xz(double p_x, double p_z) { return p_x + p_z - p_x * p_z; }

std::pair<double, double> likelihood_band(std::uint64_t shots, std::uint64_t errors, double factor) {
    if (shots < 1) throw std::invalid_argument("likelihood_band: shots must be positive");
    if (errors > shots) throw std::invalid_argument("likelihood_band: errors exceed shots");
    if (!(factor >= 1)) throw std::invalid_argument("likelihood_band: factor must be at least 1");
    const double n = static_cast<double>(shots);
    const double k = static_cast<double>(errors);
    auto log_l = [&](double p) {
        double a = k > 0 ? k * std::log(p) : 0.0;
        double b = k < n ? (n - k) * std::log1p(-p) : 0.0;
        return a + b;
    };
    const double mle = k / n;
    const double target = log_l(mle) - std::log(factor);
    auto above = [&](double p) { return log_l(p) >= target; };
    // Bisect between a point inside the band and a point outside it.
    auto solve = [&](double inside, double outside) {
        for (int it = 0; it < 2000; it++) {
            double mid = 0.5 * (inside + outside);
            if (mid == inside || mid == outside) break;
            (above(mid) ? inside : outside) = mid;
            if (std::abs(outside - inside) <= 1e-15 * std::max(std::abs(inside), std::abs(outside))) break;
        }
        return inside;
    };
    double low = errors == 0 ? 0.0 : solve(mle, 0.0);
    double high = errors == shots ? 1.0 : solve(mle, 1.0);
    return {low, high};
}

std::string csv_row(const StatsRecord &r) {
    std::ostringstream out;
    out << r.id << "," << r.diameter << "," << (r.pitch ? std::to_string(*r.pitch) : "none") << "," << r.hold << ","
        << basis_char(r.basis) << "," << format_probability(r.p) << "," << r.rounds << "," << r.shots << ","
        << r.errors << ",";
    out.setf(std::ios::fixed);
    out.precision(3);
    out << r.seconds << "," << r.seed;
    return out.str();
}

StatsRecord parse_csv_row(const std::string &line) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 11) throw std::runtime_error("csv row must have 11 columns: " + line);
    try {
        StatsRecord r;
        r.id = cols[0];
        r.diameter = std::stoi(cols[1]);
        if (cols[2] != "none") r.pitch = std::stoi(cols[2]);
        r.hold = std::stoi(cols[3]);
        if (cols[4] != "X" && cols[4] != "Z") throw std::invalid_argument("basis");
        r.basis = cols[4] == "X" ? Basis::X : Basis::Z;
        r.p = std::stod(cols[5]);
        r.rounds = std::stoi(cols[6]);
        r.shots = std::stoull(cols[7]);
        r.errors = std::stoull(cols[8]);
        r.seconds = std::stod(cols[9]);
        r.seed = std::stoull(cols[10]);
        return r;
    } catch (const std::logic_error &) {
        throw std::runtime_error("malformed csv row: " + line);
    }
}

void append_csv(const std::string &path, const StatsRecord &record) {
    std::size_t existing_rows = 0;
    bool need_header = true;
    {
        std::ifstream in(path);
        std::string line;
        if (in && std::getline(in, line)) {
            if (line != kCsvHeader) throw std::runtime_error(path + ": unexpected csv header");
            need_header = false;
            while (std::getline(in, line)) {
                if (!line.empty()) existing_rows++;
            }
        }
    }
    {
        std::ofstream out(path, std::ios::app);
        if (!out) throw std::runtime_error("cannot open " + path + " for writing");
        if (need_header) out << kCsvHeader << "\n";
        out << csv_row(record) << "\n";
    }
    const std::string meta_path = path + ".meta.json";
    nlohmann::ordered_json meta;
    {
        std::ifstream in(meta_path);
        if (in && !need_header) meta = nlohmann::ordered_json::parse(in, nullptr, false);
        if (meta.is_discarded() || !meta.is_object()) meta = nlohmann::ordered_json::object();
    }
    meta["columns"] = kCsvHeader;
    meta["error_definition"] = "shot in which any observable prediction differs from the sampled flip";
    meta["per_round_rate"] = "(1 - (1 - 2*errors/shots)^(1/rounds)) / 2";
    meta["xz_combination"] = "p_x + p_z - p_x*p_z";
    if (!meta.contains("rows")) meta["rows"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json row;
    row["row"] = existing_rows;
    row["id"] = record.id;
    row["observable_errors"] = record.observable_errors;
    meta["rows"].push_back(row);
    std::ofstream out(meta_path);
    out << meta.dump(2) << "\n";
}

std::vector<StatsRecord> read_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error(path + ": unexpected csv header");
    std::vector<StatsRecord> out;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(parse_csv_row(line));
    }
    return out;
}

}  // namespace fractalshor
