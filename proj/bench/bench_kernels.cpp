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


// Serial reference kernels against the bit-packed and OpenMP ones.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "fractalshor/builders.hpp"
#include "fractalshor/decoder.hpp"
#include "fractalshor/frame_sim.hpp"
#include "fractalshor/noise.hpp"

namespace {

using namespace fractalshor;

const CompiledCircuit &circuit(int d, double p) {
    static std::map<std::pair<int, double>, std::unique_ptr<CompiledCircuit>> cache;
    auto &slot = cache[{d, p}];
    if (!slot) {
        MemoryExperimentSpec spec;
        spec.lattice = LatticeSpec::square(d);
        spec.rounds = d;
        slot = std::make_unique<CompiledCircuit>(apply_noise(build_memory(spec), NoiseModel(p)));
    }
    return *slot;
}

void BM_sample_reference(benchmark::State &state) {
    const auto &c = circuit(static_cast<int>(state.range(0)), 1e-3);
    for (auto _ : state) benchmark::DoNotOptimize(sample_batch_reference(c, 0, 1024, 7));
    state.SetItemsProcessed(state.iterations() * 1024);
}

void BM_sample_packed(benchmark::State &state) {
    const auto &c = circuit(static_cast<int>(state.range(0)), 1e-3);
    for (auto _ : state) benchmark::DoNotOptimize(sample_batch_packed(c, 0, 1024, 7));
    state.SetItemsProcessed(state.iterations() * 1024);
}

void BM_sample_parallel(benchmark::State &state) {
    const auto &c = circuit(static_cast<int>(state.range(0)), 1e-3);
    SampleOptions opts;
    opts.threads = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(sample(c, 8192, 7, opts));
    state.SetItemsProcessed(state.iterations() * 8192);
}

struct DecodeFixture {
    DecodingGraph graph;
    SyndromeBatch batch;
};

const DecodeFixture &decode_fixture(int d) {
    static std::map<int, std::unique_ptr<DecodeFixture>> cache;
    auto &slot = cache[d];
    if (!slot) {
        const auto &c = circuit(d, 3e-3);
        slot = std::make_unique<DecodeFixture>(DecodeFixture{build_graph(c), sample(c, 256, 3)});
    }
    return *slot;
}

void BM_decode_reference(benchmark::State &state) {
    const auto &f = decode_fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(decode_reference(f.graph, f.batch));
    state.SetItemsProcessed(state.iterations() * f.batch.shots());
}

void BM_decode_parallel(benchmark::State &state) {
    const auto &f = decode_fixture(static_cast<int>(state.range(0)));
    int threads = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(decode(f.graph, f.batch, threads));
    state.SetItemsProcessed(state.iterations() * f.batch.shots());
}

BENCHMARK(BM_sample_reference)->Arg(5)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sample_packed)->Arg(5)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sample_parallel)->Args({11, 1})->Args({11, 2})->Args({11, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_decode_reference)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_decode_parallel)->Args({5, 1})->Args({9, 1})->Args({9, 2})->Args({9, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
