#pragma once

#include <algorithm>
#include <map>
#include <unordered_map>
#include <vector>

#include "dynmatch/core_graph.hpp"
#include "dynmatch/rgmm.hpp"

namespace dynmatch {

/// Near-maximum matching of the union of the maintained greedy matchings.
///
/// The union graph has degree at most L + 1, so every repair is a bounded
/// local search: after each change the matcher guarantees that no augmenting
/// path with at most 2k - 1 edges exists, which gives
/// |answer| >= k/(k+1) * mu(union).
class FinalMatcher {
public:
    FinalMatcher() = default;

    FinalMatcher(std::size_t n, int depth) : depth_(depth), mate_(n, kNoVertex), adj_(n), stamp_(n, 0) {
        if (depth < 1) throw ConfigError("augmenting depth must be at least 1");
    }

    /// Applies one union delta: an edge joined (+1) or left (-1) some M_i.
    DeltaList union_apply(EdgeKey e, bool joined) {
        DeltaList out;
        touched_.clear();
        const std::uint64_t code = e.code();
        if (joined) {
            int& mult = multiplicity_[code];
            if (++mult > 1) return out;
            adj_[e.lo].push_back(e.hi);
            adj_[e.hi].push_back(e.lo);
            repair({e.lo, e.hi});
        } else {
            auto it = multiplicity_.find(code);
            if (it == multiplicity_.end() || it->second <= 0) {
                throw ConsistencyError("union multiplicity underflow on " + to_string(e));
            }
            if (--it->second > 0) return out;
            multiplicity_.erase(it);
            erase_adj(e.lo, e.hi);
            erase_adj(e.hi, e.lo);
            if (mate_[e.lo] == e.hi) {
                remember(e.lo);
                remember(e.hi);
                mate_[e.lo] = kNoVertex;
                mate_[e.hi] = kNoVertex;
                --size_;
                repair({e.lo, e.hi});
            }
        }
        return net_delta();
    }

    /// Flips an augmenting path v0 - v1 = v2 - ... - v_{2t+1} of union edges
    /// (both ends free, inner pairs matched), then restores the short-path
    /// guarantee around it.
    DeltaList augment_path(const std::vector<VertexId>& path) {
        touched_.clear();
        if (path.size() < 2 || path.size() % 2 != 0) throw ConsistencyError("augmenting path needs an even vertex count");
        if (mate_.at(path.front()) != kNoVertex || mate_.at(path.back()) != kNoVertex) {
            throw ConsistencyError("augmenting path endpoints must be free");
        }
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            if (multiplicity(EdgeKey::make(path[i], path[i + 1])) == 0) {
                throw ConsistencyError("augmenting path leaves the union graph");
            }
            if (i % 2 == 1 && mate_[path[i]] != path[i + 1]) throw ConsistencyError("augmenting path is not alternating");
        }
        path_ = path;
        augment();
        repair(path);
        return net_delta();
    }

    int depth() const { return depth_; }
    std::size_t size() const { return size_; }
    std::size_t vertex_count() const { return mate_.size(); }
    std::size_t union_edge_count() const { return multiplicity_.size(); }
    VertexId mate(VertexId v) const { return mate_.at(v); }
    const std::vector<VertexId>& union_neighbors(VertexId v) const { return adj_.at(v); }
    std::size_t probes() const { return probes_; }

    int multiplicity(EdgeKey e) const {
        auto it = multiplicity_.find(e.code());
        return it == multiplicity_.end() ? 0 : it->second;
    }

    std::vector<EdgeKey> union_edges() const {
        std::vector<EdgeKey> out;
        out.reserve(multiplicity_.size());
        for (const auto& [code, m] : multiplicity_) out.push_back(EdgeKey::from_code(code));
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<EdgeKey> matching() const {
        std::vector<EdgeKey> out;
        out.reserve(size_);
        for (VertexId v = 0; v < mate_.size(); ++v) {
            if (mate_[v] != kNoVertex && v < mate_[v]) out.push_back(EdgeKey{v, mate_[v]});
        }
        return out;
    }

    std::size_t max_degree() const {
        std::size_t d = 0;
        for (const auto& a : adj_) d = std::max(d, a.size());
        return d;
    }

private:
    void erase_adj(VertexId v, VertexId u) {
        auto& a = adj_[v];
        auto it = std::find(a.begin(), a.end(), u);
        if (it != a.end()) {
            *it = a.back();
            a.pop_back();
        }
    }

    // Invariant while running: every augmenting path of length <= 2k-1
    // touches a vertex in `seeds`.
    void repair(std::vector<VertexId> seeds) {
        const int max_len = 2 * depth_ - 1;
        while (!seeds.empty()) {
            const VertexId s = seeds.back();
            bool augmented = false;
            for (VertexId x : free_vertices_near(s, max_len)) {
                path_.clear();
                path_.push_back(x);
                if (search(x, max_len)) {
                    augment();
                    seeds.insert(seeds.end(), path_.begin(), path_.end());
                    augmented = true;
                    break;
                }
            }
            if (!augmented) seeds.pop_back();
        }
    }

    std::vector<VertexId> free_vertices_near(VertexId s, int radius) {
        if (++epoch_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            epoch_ = 1;
        }
        std::vector<VertexId> frontier{s};
        stamp_[s] = epoch_;
        std::vector<VertexId> free;
        if (mate_[s] == kNoVertex) free.push_back(s);
        for (int d = 0; d < radius && !frontier.empty(); ++d) {
            std::vector<VertexId> next;
            for (VertexId v : frontier) {
                for (VertexId u : adj_[v]) {
                    if (stamp_[u] == epoch_) continue;
                    stamp_[u] = epoch_;
                    next.push_back(u);
                    if (mate_[u] == kNoVertex) free.push_back(u);
                }
            }
            frontier = std::move(next);
        }
        return free;
    }

    bool on_path(VertexId v) const { return std::find(path_.begin(), path_.end(), v) != path_.end(); }

    // Depth-bounded search over simple alternating paths from path_.back().
    bool search(VertexId cur, int remaining) {
        for (VertexId y : adj_[cur]) {
            ++probes_;
            if (y == mate_[cur] || on_path(y)) continue;
            if (mate_[y] == kNoVertex) {
                path_.push_back(y);
                return true;
            }
            if (remaining < 3) continue;
            const VertexId z = mate_[y];
            if (on_path(z)) continue;
            path_.push_back(y);
            path_.push_back(z);
            if (search(z, remaining - 2)) return true;
            path_.pop_back();
            path_.pop_back();
        }
        return false;
    }

    void augment() {
        for (VertexId v : path_) remember(v);
        for (std::size_t i = 0; i + 1 < path_.size(); i += 2) {
            mate_[path_[i]] = path_[i + 1];
            mate_[path_[i + 1]] = path_[i];
        }
        ++size_;
    }

    void remember(VertexId v) {
        if (touched_.find(v) == touched_.end()) touched_.emplace(v, mate_[v]);
    }

    DeltaList net_delta() const {
        DeltaList out;
        for (const auto& [v, before] : touched_) {
            const VertexId after = mate_[v];
            if (before == after) continue;
            if (before != kNoVertex && v < before) out.left.push_back(EdgeKey{v, before});
            if (after != kNoVertex && v < after) out.joined.push_back(EdgeKey{v, after});
        }
        return out;
    }

    int depth_ = 1;
    std::vector<VertexId> mate_;
    std::vector<std::vector<VertexId>> adj_;
    std::unordered_map<std::uint64_t, int> multiplicity_;
    std::size_t size_ = 0;
    std::size_t probes_ = 0;
    std::vector<VertexId> path_;
    std::map<VertexId, VertexId> touched_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
};

}  // namespace dynmatch
