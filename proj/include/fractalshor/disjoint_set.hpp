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

#ifndef FRACTALSHOR_DISJOINT_SET_HPP
#define FRACTALSHOR_DISJOINT_SET_HPP

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace fractalshor {

class DisjointSet {
   public:
    explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns false if a and b were already joined.
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (rank_[a] < rank_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        if (rank_[a] == rank_[b]) {
            rank_[a]++;
        }
        return true;
    }

    /// Sets ordered by their smallest member; members ascending.
    std::vector<std::vector<std::size_t>> groups() {
        std::vector<std::vector<std::size_t>> out;
        std::vector<std::size_t> slot(parent_.size(), SIZE_MAX);
        for (std::size_t k = 0; k < parent_.size(); k++) {
            std::size_t root = find(k);
            if (slot[root] == SIZE_MAX) {
                slot[root] = out.size();
                out.emplace_back();
            }
            out[slot[root]].push_back(k);
        }
        return out;
    }

    std::size_t size() const { return parent_.size(); }

   private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned char> rank_;
};

}  // namespace fractalshor

#endif
