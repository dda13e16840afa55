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

#include "fractalshor/decoder.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "fractalshor/blossom.hpp"
#include "fractalshor/disjoint_set.hpp"

namespace fractalshor {

double edge_weight(double p) { return -std::log(p / (1 - p)); }

std::int64_t GraphEdge::int_weight() const {
    return std::max<std::int64_t>(1, std::llround(weight() * kWeightScale));
}

struct DecodingGraph::Cache {
    std::once_flag adjacency_once;
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> incident;
    std::vector<std::int64_t> weights;
    bool has_observables[2] = {false, false};
    std::unique_ptr<std::once_flag[]> row_once;
    std::vector<std::unique_ptr<Row>> rows;
};

DecodingGraph::DecodingGraph(std::uint32_t num_detectors, std::uint32_t num_observables)
    : num_detectors_(num_detectors),
      num_observables_(num_observables),
      basis_(num_detectors + 2, Basis::X),
      cache_(std::make_shared<Cache>()) {
    if (num_observables > 64) {
        throw std::invalid_argument("at most 64 observables are supported");
    }
    basis_[num_detectors + 1] = Basis::Z;
}

void DecodingGraph::set_detector_basis(std::uint32_t detector, Basis basis) {
    if (detector >= num_detectors_) throw std::out_of_range("detector out of range");
    basis_[detector] = basis;
    cache_ = std::make_shared<Cache>();
}

void DecodingGraph::add_edge(std::uint32_t u, std::uint32_t v, double p, std::uint64_t observables, Basis basis) {
    if (u > v) std::swap(u, v);
    // A boundary self-loop stands for a mechanism that flips observables
    // without firing any detector.
    bool self_loop = u == v && is_boundary(u);
    if (v >= num_nodes() || (u >= num_detectors_ && !self_loop) || (u == v && !self_loop)) {
        throw std::invalid_argument("bad edge endpoints");
    }
    if (!(p > 0) || p >= 0.5) {
        throw std::invalid_argument("edge probability must lie in (0, 0.5), got " + format_probability(p));
    }
    if ((is_boundary(v) && v != boundary(basis)) || (is_boundary(u) && u != boundary(basis))) {
        throw std::invalid_argument("boundary edge attached to the wrong basis");
    }
    if (num_observables_ < 64 && (observables >> num_observables_) != 0) {
        throw std::invalid_argument("observable mask out of range");
    }
    if (!is_boundary(u)) basis_[u] = basis;
    if (!is_boundary(v)) basis_[v] = basis;
    // Any earlier adjacency or distance rows are stale now.
    cache_ = std::make_shared<Cache>();
    auto key = std::make_tuple(u, v, observables);
    if (auto it = edge_index_.find(key); it != edge_index_.end()) {
        auto &e = edges_[it->second];
        double q = e.probability * (1 - p) + p * (1 - e.probability);
        if (q >= 0.5) {
            throw std::invalid_argument("merged edge probability reached 0.5");
        }
        e.probability = q;
        return;
    }
    edge_index_.emplace(key, static_cast<std::uint32_t>(edges_.size()));
    edges_.push_back(GraphEdge{u, v, p, observables});
}

void DecodingGraph::finalize_adjacency() const {
    std::call_once(cache_->adjacency_once, [this] {
        auto &c = *cache_;
        const std::uint32_t n = num_nodes();
        c.offsets.assign(n + 1, 0);
        for (const auto &e : edges_) {
            c.offsets[e.u + 1]++;
            if (e.v != e.u) c.offsets[e.v + 1]++;
        }
        for (std::uint32_t i = 0; i < n; i++) c.offsets[i + 1] += c.offsets[i];
        c.incident.resize(c.offsets[n]);
        std::vector<std::uint32_t> fill(c.offsets.begin(), c.offsets.end() - 1);
        c.weights.resize(edges_.size());
        for (std::uint32_t k = 0; k < edges_.size(); k++) {
            c.incident[fill[edges_[k].u]++] = k;
            if (edges_[k].v != edges_[k].u) c.incident[fill[edges_[k].v]++] = k;
            c.weights[k] = edges_[k].int_weight();
            if (edges_[k].observables != 0) c.has_observables[basis_[edges_[k].u] == Basis::X ? 0 : 1] = true;
        }
        c.row_once = std::make_unique<std::once_flag[]>(n);
        c.rows.resize(n);
    });
}

bool DecodingGraph::basis_has_observables(Basis basis) const {
    finalize_adjacency();
    return cache_->has_observables[basis == Basis::X ? 0 : 1];
}

std::span<const std::uint32_t> DecodingGraph::incident(std::uint32_t node) const {
    finalize_adjacency();
    const auto &c = *cache_;
    return {c.incident.data() + c.offsets[node], c.incident.data() + c.offsets[node + 1]};
}

DecodingGraph::Row DecodingGraph::shortest_paths(std::uint32_t node) const {
    finalize_adjacency();
    const auto &c = *cache_;
    const std::uint32_t n = num_nodes();
    Row row;
    row.distance.assign(n, kUnreachable);
    row.observables.assign(n, 0);
    std::vector<char> done(n, 0);
    using Item = std::pair<std::int64_t, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    row.distance[node] = 0;
    heap.emplace(0, node);
    while (!heap.empty()) {
        auto [d, x] = heap.top();
        heap.pop();
        if (done[x]) continue;
        done[x] = 1;
        // Paths do not pass through a boundary.
        if (x != node && is_boundary(x)) continue;
        for (std::uint32_t i = c.offsets[x]; i < c.offsets[x + 1]; i++) {
            std::uint32_t k = c.incident[i];
            const auto &e = edges_[k];
            std::uint32_t y = e.u == x ? e.v : e.u;
            std::int64_t nd = d + c.weights[k];
            if (nd < row.distance[y]) {
                row.distance[y] = nd;
                row.observables[y] = row.observables[x] ^ e.observables;
                heap.emplace(nd, y);
            }
        }
    }
    return row;
}

const DecodingGraph::Row &DecodingGraph::cached_row(std::uint32_t node) const {
    finalize_adjacency();
    auto &c = *cache_;
    std::call_once(c.row_once[node], [&] { c.rows[node] = std::make_unique<Row>(shortest_paths(node)); });
    return *c.rows[node];
}

namespace {

std::string node_name(const DecodingGraph &g, std::uint32_t node) {
    return g.is_boundary(node) ? std::string("BOUNDARY") : "D" + std::to_string(node);
}

std::string mask_text(std::uint64_t mask) {
    if (mask == 0) return "-";
    std::string out;
    for (int k = 0; k < 64; k++) {
        if ((mask >> k) & 1) {
            if (!out.empty()) out += ',';
            out += std::to_string(k);
        }
    }
    return out;
}

}  // namespace

void DecodingGraph::write_text(std::ostream &out) const {
    out << "graph detectors=" << num_detectors_ << " observables=" << num_observables_ << "\n";
    for (const auto &e : edges_) {
        std::ostringstream w;
        w.precision(4);
        w << std::fixed << e.weight();
        out << "edge " << node_name(*this, e.u) << " " << node_name(*this, e.v) << " w=" << w.str()
            << " p=" << format_probability(e.probability) << " obs=" << mask_text(e.observables)
            << " basis=" << basis_char(basis_[e.u]) << "\n";
    }
}

DecodingGraph DecodingGraph::read_text(std::istream &in) {
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string &what) {
        throw std::runtime_error("graph line " + std::to_string(line_no) + ": " + what);
    };
    std::unique_ptr<DecodingGraph> graph;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string head;
        ss >> head;
        std::map<std::string, std::string> fields;
        std::vector<std::string> words;
        std::string tok;
        while (ss >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) {
                words.push_back(tok);
            } else {
                fields[tok.substr(0, eq)] = tok.substr(eq + 1);
            }
        }
        try {
            if (head == "graph") {
                if (graph) fail("duplicate header");
                graph = std::make_unique<DecodingGraph>(static_cast<std::uint32_t>(std::stoul(fields.at("detectors"))),
                                                        static_cast<std::uint32_t>(std::stoul(fields.at("observables"))));
            } else if (head == "edge") {
                if (!graph) fail("edge before header");
                if (words.size() != 2) fail("expected two endpoints");
                const std::string &b = fields.at("basis");
                if (b != "X" && b != "Z") fail("bad basis");
                Basis basis = b == "X" ? Basis::X : Basis::Z;
                auto parse_node = [&](const std::string &w) -> std::uint32_t {
                    if (w == "BOUNDARY") return graph->boundary(basis);
                    if (w.size() < 2 || w[0] != 'D') fail("bad node '" + w + "'");
                    return static_cast<std::uint32_t>(std::stoul(w.substr(1)));
                };
                std::uint32_t u = parse_node(words[0]);
                std::uint32_t v = parse_node(words[1]);
                std::uint64_t mask = 0;
                const std::string &obs = fields.at("obs");
                if (obs != "-") {
                    std::istringstream os(obs);
                    std::string part;
                    while (std::getline(os, part, ',')) {
                        unsigned long k = std::stoul(part);
                        if (k >= 64) fail("observable index too large");
                        mask |= std::uint64_t{1} << k;
                    }
                }
                graph->add_edge(u, v, std::stod(fields.at("p")), mask, basis);
            } else {
                fail("unknown line '" + head + "'");
            }
        } catch (const std::out_of_range &) {
            fail("missing field");
        } catch (const std::invalid_argument &e) {
            fail(e.what());
        }
    }
    if (!graph) throw std::runtime_error("graph: missing header");
    return std::move(*graph);
}

DecodingGraph build_graph(std::span<const FaultMechanism> mechanisms, std::uint32_t num_detectors,
                          std::uint32_t num_observables) {
    DecodingGraph g(num_detectors, num_observables);
    for (const auto &m : mechanisms) {
        if (m.detectors.size() > 2) {
            throw NonGraphlikeError(m.source, "mechanism touches " + std::to_string(m.detectors.size()) + " detectors");
        }
        if (m.probability == 0) continue;
        if (m.detectors.empty()) {
            if (m.observables != 0) g.add_edge(g.boundary(m.basis), g.boundary(m.basis), m.probability, m.observables, m.basis);
            continue;
        }
        std::uint32_t u = m.detectors[0];
        std::uint32_t v = m.detectors.size() == 2 ? m.detectors[1] : g.boundary(m.basis);
        g.add_edge(u, v, m.probability, m.observables, m.basis);
    }
    return g;
}

DecodingGraph build_graph(const CompiledCircuit &circuit) {
    auto dem = extract_dem(circuit);
    DecodingGraph g = build_graph(dem, circuit.num_detectors, circuit.num_observables);
    for (std::uint32_t d = 0; d < circuit.num_detectors; d++) g.set_detector_basis(d, circuit.det_basis[d]);
    return g;
}

namespace {

// Stand-in boundary distance for events that cannot reach their boundary.
constexpr std::int64_t kUnreachableCost = std::int64_t{1} << 50;

template <typename RowFn>
DecodeResult decode_impl(const DecodingGraph &graph, std::span<const std::uint32_t> fired, RowFn &&row_of) {
    DecodeResult res;
    const std::size_t k = fired.size();
    if (k == 0) return res;
    std::vector<const DecodingGraph::Row *> rows(k);
    std::vector<std::int64_t> bdist(k);
    std::vector<std::uint32_t> bnode(k);
    for (std::size_t i = 0; i < k; i++) {
        if (fired[i] >= graph.num_detectors()) throw std::out_of_range("fired detector out of range");
        rows[i] = &row_of(fired[i]);
        bnode[i] = graph.boundary(graph.node_basis(fired[i]));
        std::int64_t d = rows[i]->distance[bnode[i]];
        bdist[i] = d == DecodingGraph::kUnreachable ? kUnreachableCost : d;
    }
    // Pair (i, j) only helps if it beats sending both to the boundary.
    struct Gain {
        std::uint32_t i, j;
        std::int64_t gain;
        bool candidate;
    };
    std::vector<Gain> gains;
    std::vector<std::vector<std::uint32_t>> by_event(k);
    for (std::size_t i = 0; i < k; i++) {
        for (std::size_t j = i + 1; j < k; j++) {
            std::int64_t d = rows[i]->distance[fired[j]];
            if (d == DecodingGraph::kUnreachable) continue;
            std::int64_t gain = bdist[i] + bdist[j] - d;
            if (gain > 0) {
                by_event[i].push_back(static_cast<std::uint32_t>(gains.size()));
                by_event[j].push_back(static_cast<std::uint32_t>(gains.size()));
                gains.push_back(Gain{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), gain, false});
            }
        }
    }
    // Start from each event's strongest pairs; the dual certificate below
    // pulls in any other pair that could improve the matching.
    constexpr std::size_t kInitialNeighbors = 2;
    for (auto &list : by_event) {
        std::size_t keep = std::min(kInitialNeighbors, list.size());
        std::partial_sort(list.begin(), list.begin() + keep, list.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (gains[a].gain != gains[b].gain) return gains[a].gain > gains[b].gain;
            return a < b;
        });
        for (std::size_t n = 0; n < keep; n++) gains[list[n]].candidate = true;
    }

    // Each event belongs to one solved group; groups untouched by newly added
    // pairs keep their solution between rounds.
    std::vector<int> mate(k, -1);
    std::vector<int> local(k, -1);
    std::vector<std::shared_ptr<CertifiedMatching>> cert(k);
    std::vector<char> dirty(k, 1);
    while (true) {
        DisjointSet ds(k);
        for (const auto &g : gains) {
            if (g.candidate) ds.unite(g.i, g.j);
        }
        auto groups = ds.groups();
        std::vector<std::size_t> group_of(k, 0);
        for (std::size_t g = 0; g < groups.size(); g++) {
            for (auto x : groups[g]) group_of[x] = g;
        }
        std::vector<char> group_dirty(groups.size(), 0);
        for (std::size_t x = 0; x < k; x++) group_dirty[group_of[x]] |= dirty[x];
        std::vector<std::vector<WeightedEdge>> group_edges(groups.size());
        for (std::size_t g = 0; g < groups.size(); g++) {
            if (!group_dirty[g]) continue;
            for (std::size_t a = 0; a < groups[g].size(); a++) local[groups[g][a]] = static_cast<int>(a);
        }
        for (const auto &g : gains) {
            std::size_t grp = group_of[g.i];
            if (g.candidate && group_dirty[grp]) group_edges[grp].push_back(WeightedEdge{local[g.i], local[g.j], g.gain});
        }
        for (std::size_t g = 0; g < groups.size(); g++) {
            if (!group_dirty[g]) continue;
            const auto &group = groups[g];
            std::shared_ptr<CertifiedMatching> c;
            if (group.size() >= 2) c = std::make_shared<CertifiedMatching>(static_cast<int>(group.size()), group_edges[g]);
            for (std::size_t a = 0; a < group.size(); a++) {
                cert[group[a]] = c;
                mate[group[a]] = c && c->mate()[a] >= 0 ? static_cast<int>(group[c->mate()[a]]) : -1;
            }
        }
        std::fill(dirty.begin(), dirty.end(), 0);
        auto dual = [&](std::uint32_t x) -> std::int64_t { return cert[x] ? cert[x]->vertex_dual(local[x]) : 0; };
        // Only the two most violated pairs of each event join, to keep the
        // solved groups sparse; the rest are re-checked next round.
        using Violation = std::pair<std::int64_t, std::uint32_t>;
        constexpr Violation kNone{0, UINT32_MAX};
        std::vector<std::array<Violation, 2>> worst(k, {kNone, kNone});
        for (std::uint32_t gi = 0; gi < gains.size(); gi++) {
            const auto &g = gains[gi];
            if (g.candidate) continue;
            std::int64_t slack = group_of[g.i] == group_of[g.j] ? cert[g.i]->slack(local[g.i], local[g.j], g.gain)
                                                                : dual(g.i) + dual(g.j) - 4 * g.gain;
            if (slack >= 0) continue;
            for (auto x : {g.i, g.j}) {
                if (slack < worst[x][0].first) {
                    worst[x][1] = worst[x][0];
                    worst[x][0] = {slack, gi};
                } else if (slack < worst[x][1].first) {
                    worst[x][1] = {slack, gi};
                }
            }
        }
        bool added = false;
        for (const auto &pair : worst) {
            for (const auto &[slack, gi] : pair) {
                if (gi == UINT32_MAX || gains[gi].candidate) continue;
                gains[gi].candidate = true;
                dirty[gains[gi].i] = dirty[gains[gi].j] = 1;
                added = true;
            }
        }
        if (!added) break;
    }
    for (std::size_t i = 0; i < k; i++) {
        if (mate[i] < 0) {
            res.weight += bdist[i];
            res.prediction ^= rows[i]->observables[bnode[i]];
            res.pairs.emplace_back(fired[i], bnode[i]);
        } else if (static_cast<std::size_t>(mate[i]) > i) {
            res.weight += rows[i]->distance[fired[mate[i]]];
            res.prediction ^= rows[i]->observables[fired[mate[i]]];
            res.pairs.emplace_back(fired[i], fired[mate[i]]);
        }
    }
    return res;
}

}  // namespace

DecodeResult decode_shot(const DecodingGraph &graph, std::span<const std::uint32_t> fired) {
    return decode_impl(graph, fired, [&](std::uint32_t d) -> const DecodingGraph::Row & { return graph.cached_row(d); });
}

std::uint64_t predict_shot(const DecodingGraph &graph, std::span<const std::uint32_t> fired) {
    const bool keep[2] = {graph.basis_has_observables(Basis::X), graph.basis_has_observables(Basis::Z)};
    if (keep[0] && keep[1]) return decode_shot(graph, fired).prediction;
    std::vector<std::uint32_t> kept;
    for (auto d : fired) {
        if (d < graph.num_detectors() && keep[graph.node_basis(d) == Basis::X ? 0 : 1]) kept.push_back(d);
    }
    return decode_shot(graph, kept).prediction;
}

namespace {

void check_dims(const DecodingGraph &graph, const SyndromeBatch &batch) {
    if (batch.num_detectors() != graph.num_detectors() || batch.num_observables() != graph.num_observables()) {
        throw std::invalid_argument("syndrome batch does not match the decoding graph dimensions");
    }
}

}  // namespace

std::vector<std::uint64_t> decode(const DecodingGraph &graph, const SyndromeBatch &batch, int threads) {
    check_dims(graph, batch);
    const auto shots = static_cast<std::int64_t>(batch.shots());
    std::vector<std::uint64_t> out(batch.shots(), 0);
    int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(nthreads)
    for (std::int64_t s = 0; s < shots; s++) {
        auto fired = batch.fired_detectors(static_cast<std::size_t>(s));
        out[s] = predict_shot(graph, fired);
    }
    return out;
}

std::vector<std::uint64_t> decode_reference(const DecodingGraph &graph, const SyndromeBatch &batch) {
    check_dims(graph, batch);
    std::vector<std::uint64_t> out(batch.shots(), 0);
    std::map<std::uint32_t, DecodingGraph::Row> rows;
    for (std::size_t s = 0; s < batch.shots(); s++) {
        auto fired = batch.fired_detectors(s);
        rows.clear();
        out[s] = decode_impl(graph, fired, [&](std::uint32_t d) -> const DecodingGraph::Row & {
                     auto it = rows.find(d);
                     if (it == rows.end()) it = rows.emplace(d, graph.shortest_paths(d)).first;
                     return it->second;
                 }).prediction;
    }
    return out;
}

}  // namespace fractalshor
