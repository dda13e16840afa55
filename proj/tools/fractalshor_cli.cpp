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

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fractalshor/analysis.hpp"
#include "fractalshor/bench.hpp"
#include "fractalshor/builders.hpp"
#include "fractalshor/decoder.hpp"
#include "fractalshor/frame_sim.hpp"
#include "fractalshor/noise.hpp"

using namespace fractalshor;

namespace {

constexpr std::uint64_t kDefaultSeed = 20260101;

// Flag or argument problems found after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Basis parse_basis(const std::string &s) {
    if (s == "X" || s == "x") return Basis::X;
    if (s == "Z" || s == "z") return Basis::Z;
    throw UsageError("--basis must be X or Z");
}

std::ofstream open_out(const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

// Loads a circuit and adds noise when --p is given for a noiseless one.
Circuit load_noisy(const std::string &path, std::optional<double> p) {
    Circuit c = read_circuit_file(path);
    if (p) {
        if (c.has_noise()) throw UsageError("--p given but " + path + " already carries noise");
        c = apply_noise(c, NoiseModel(*p));
    }
    return c;
}

void report_nongraphlike(const Circuit &c, const NonGraphlikeError &e) {
    std::size_t layer = 0;
    try {
        CompiledCircuit cc(c);
        layer = cc.ops.at(e.fault.instruction).layer;
    } catch (const std::exception &) {
    }
    std::cerr << "error: non-graphlike fault at layer " << layer << ": " << e.what() << "\n";
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"fractalshor: Bacon-Shor circuits, sampling, matching and fault analysis"};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<int> threads;
    app.add_option("--threads", threads, "Worker threads (default: FRACTALSHOR_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    // gen
    auto *gen = app.add_subcommand("gen", "Write a memory or surgery circuit");
    int diameter = 5;
    std::optional<int> pitch;
    int hold = 1;
    std::string basis_text = "X";
    std::optional<int> rounds;
    bool surgery = false;
    int rounds_before = 1, rounds_during = 3, rounds_after = 1, blocks = 1;
    std::optional<double> gen_p;
    std::string gen_out;
    gen->add_option("--diameter", diameter, "Grid diameter (surgery: patch distance)")->check(CLI::Range(2, 1 << 16));
    gen->add_option("--pitch", pitch, "Fractal pitch (odd, >= 3); omit for the plain schedule");
    gen->add_option("--hold", hold, "Hold factor")->check(CLI::PositiveNumber);
    gen->add_option("--basis", basis_text, "X or Z");
    gen->add_option("--rounds", rounds, "Memory rounds (default: diameter)");
    gen->add_flag("--surgery", surgery, "Lattice surgery XX measurement between two patches");
    gen->add_option("--rounds-before", rounds_before, "Surgery rounds before stitching");
    gen->add_option("--rounds-during", rounds_during, "Surgery rounds while stitched");
    gen->add_option("--rounds-after", rounds_after, "Surgery rounds after stitching");
    gen->add_option("--blocks", blocks, "Back-to-back surgery blocks");
    gen->add_option("--p", gen_p, "Add uniform noise of this strength")->check(CLI::Range(0.0, 0.5));
    gen->add_option("--out", gen_out, "Output .fsc path")->required();

    // run
    auto *run = app.add_subcommand("run", "Sample, decode and append a CSV row");
    std::string run_circuit, run_csv;
    std::optional<std::string> run_dem;
    std::optional<double> run_p;
    std::uint64_t max_shots = 100'000'000, max_errors = 1000, seed = kDefaultSeed;
    std::size_t batch_size = 1024;
    std::optional<std::string> run_id;
    run->add_option("--circuit", run_circuit, "Circuit file")->required();
    run->add_option("--p", run_p, "Noise strength for a noiseless circuit")->check(CLI::Range(0.0, 0.5));
    run->add_option("--max-shots", max_shots, "Stop after this many shots")->check(CLI::PositiveNumber);
    run->add_option("--max-errors", max_errors, "Stop after this many errors")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "Random seed");
    run->add_option("--batch-size", batch_size, "Shots per batch")->check(CLI::PositiveNumber);
    run->add_option("--csv", run_csv, "CSV file to append to")->required();
    run->add_option("--dem", run_dem, "Decoding graph file (default: rebuilt from the circuit)");
    run->add_option("--id", run_id, "Experiment id column (default: the circuit's experiment)");

    // dem
    auto *dem = app.add_subcommand("dem", "Write the decoding graph");
    std::string dem_circuit, dem_out;
    std::optional<double> dem_p;
    dem->add_option("--circuit", dem_circuit, "Circuit file")->required();
    dem->add_option("--p", dem_p, "Noise strength for a noiseless circuit")->check(CLI::Range(0.0, 0.5));
    dem->add_option("--out", dem_out, "Graph text output")->required();

    // enumerate
    auto *enumerate = app.add_subcommand("enumerate", "Decode every single fault and classify it");
    std::string en_circuit, en_out;
    std::optional<double> en_p;
    enumerate->add_option("--circuit", en_circuit, "Circuit file")->required();
    enumerate->add_option("--p", en_p, "Noise strength for a noiseless circuit")->check(CLI::Range(0.0, 0.5));
    enumerate->add_option("--out", en_out, "JSON-lines output")->required();

    // slice
    auto *slice = app.add_subcommand("slice", "Detector supports at one layer, as JSON");
    std::string sl_circuit, sl_out;
    std::size_t sl_t = 0;
    slice->add_option("--circuit", sl_circuit, "Circuit file")->required();
    slice->add_option("--t", sl_t, "Layer index")->required();
    slice->add_option("--out", sl_out, "JSON output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    int nthreads = omp_get_max_threads();
    if (threads) {
        nthreads = *threads;
    } else if (const char *env = std::getenv("FRACTALSHOR_THREADS")) {
        try {
            nthreads = std::stoi(env);
        } catch (const std::exception &) {
            nthreads = 0;
        }
        if (nthreads < 1) {
            std::cerr << "error: FRACTALSHOR_THREADS must be a positive integer\n";
            return 2;
        }
    }
    omp_set_num_threads(nthreads);

    Circuit current;
    try {
        if (*gen) {
            Basis basis = parse_basis(basis_text);
            Circuit c;
            if (surgery) {
                if (pitch || hold != 1 || rounds) throw UsageError("--pitch, --hold and --rounds do not apply to --surgery");
                SurgeryExperimentSpec spec;
                spec.distance = diameter;
                spec.rounds_before = rounds_before;
                spec.rounds_during = rounds_during;
                spec.rounds_after = rounds_after;
                spec.basis = basis;
                spec.blocks = blocks;
                c = build_surgery(spec);
            } else {
                MemoryExperimentSpec spec{LatticeSpec::square(diameter), ScheduleParams(pitch, hold), basis,
                                          rounds.value_or(diameter)};
                c = build_memory(spec);
            }
            if (gen_p) c = apply_noise(c, NoiseModel(*gen_p));
            current = c;
            write_circuit_file(c, gen_out);
        } else if (*run) {
            current = load_noisy(run_circuit, run_p);
            if (!current.has_noise()) throw UsageError(run_circuit + " is noiseless; pass --p");
            RunOptions opt;
            opt.max_shots = max_shots;
            opt.max_errors = max_errors;
            opt.batch_size = batch_size;
            opt.threads = nthreads;
            std::optional<DecodingGraph> graph;
            if (run_dem) {
                std::ifstream in(*run_dem);
                if (!in) throw std::runtime_error("cannot open " + *run_dem);
                graph = DecodingGraph::read_text(in);
            } else {
                graph = build_graph(CompiledCircuit(current));
            }
            StatsRecord rec = run_decoded(current, *graph, seed, opt);
            if (run_id) rec.id = *run_id;
            append_csv(run_csv, rec);
            std::cout << kCsvHeader << "\n" << csv_row(rec) << "\n";
        } else if (*dem) {
            current = load_noisy(dem_circuit, dem_p);
            DecodingGraph graph = build_graph(CompiledCircuit(current));
            auto out = open_out(dem_out);
            graph.write_text(out);
        } else if (*enumerate) {
            current = load_noisy(en_circuit, en_p);
            FaultReport report = enumerate_single_faults(current, nthreads);
            auto out = open_out(en_out);
            report.write_jsonl(out);
            report.write_summary(std::cout);
        } else if (*slice) {
            current = read_circuit_file(sl_circuit);
            DetectorSlice s = detector_slice(current, sl_t);
            auto out = open_out(sl_out);
            out << slice_json(current, s);
        }
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NonGraphlikeError &e) {
        report_nongraphlike(current, e);
        return 1;
    } catch (const ValidationError &e) {
        std::cerr << "error: invalid circuit: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
