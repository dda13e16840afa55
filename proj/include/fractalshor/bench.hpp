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

#ifndef FRACTALSHOR_BENCH_HPP
#define FRACTALSHOR_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fractalshor/circuit.hpp"
#include "fractalshor/decoder.hpp"

namespace fractalshor {

struct StatsRecord {
    std::string id;
    int diameter = 0;
    std::optional<int> pitch;
    int hold = 1;
    Basis basis = Basis::X;
    double p = 0;
    int rounds = 0;
    std::uint64_t shots = 0;
    std::uint64_t errors = 0;
    double seconds = 0;
    std::uint64_t seed = 0;
    /// Shots in which observable k was mispredicted.
    std::vector<std::uint64_t> observable_errors;

    /// Same configuration columns (everything but shots, errors, seconds, seed).
    bool same_config(const StatsRecord &other) const;
};

struct RunOptions {
    std::uint64_t max_shots = 100'000'000;
    std::uint64_t max_errors = 1000;
    std::size_t batch_size = 1024;
    /// 0 means the OpenMP default.
    int threads = 0;
};

/// Samples and decodes batch after batch until max_shots shots or max_errors
/// errors (a shot with any observable mispredicted). Batches are processed in
/// order and the stop is checked after each one, so the record only depends on
/// seed and batch size. `circuit` must be noiseless; noise of strength p is
/// added here.
StatsRecord run_until(const Circuit &circuit, double p, std::uint64_t seed, const RunOptions &options = {});

/// Same loop on an already noisy circuit with a given decoding graph. The
/// record's p comes from the circuit's `noise_p` metadata.
StatsRecord run_decoded(const Circuit &noisy, const DecodingGraph &graph, std::uint64_t seed,
                        const RunOptions &options = {});

/// Sums shots, errors and seconds of two runs with the same configuration.
StatsRecord accumulate(const StatsRecord &a, const StatsRecord &b);

/// (1 - (1 - 2 p_shot)^(1/rounds)) / 2.
double per_round_rate(double p_shot, int rounds);
/// p_x + p_z - p_x p_z.
double combine_xz(double p_x, double p_z);
/// Interval of p whose binomial likelihood is within `factor` of the maximum.
std::pair<double, double> likelihood_band(std::uint64_t shots, std::uint64_t errors, double factor = 1000);

inline constexpr const char *kCsvHeader = "id,diameter,pitch,hold,basis,p,rounds,shots,errors,seconds,seed";
std::string csv_row(const StatsRecord &record);
StatsRecord parse_csv_row(const std::string &line);
/// Appends one row, writing the header first if the file is new or empty, and
/// rewrites the `<path>.meta.json` sidecar.
void append_csv(const std::string &path, const StatsRecord &record);
std::vector<StatsRecord> read_csv(const std::string &path);

}  // namespace fractalshor

#endif
