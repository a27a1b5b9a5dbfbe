#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>

#include <absl/container/btree_set.h>
#include <utility>
#include <vector>

#include "dynmatch/core_graph.hpp"

namespace dynmatch {

/// Edges that left and joined a matching during one update, in the order the
/// cascade settled them.
struct DeltaList {
    std::vector<EdgeKey> left;
    std::vector<EdgeKey> joined;
    std::size_t pops = 0;  // cascade queue pops

    bool empty() const { return left.empty() && joined.empty(); }
    std::size_t size() const { return left.size() + joined.size(); }
};

/// Greedy maximal matching FMM(G, pi) of one graph/ranking pair, kept equal to
/// the static greedy result under edge insertions and deletions.
///
/// Every present edge carries its eliminator rank, which for greedy matchings
/// is min(k(u), k(v)) where k(x) is the rank of x's matched edge (sentinel
/// when x is unmatched). Each vertex keeps its incident edges ordered by
/// eliminator rank so that "edges with eliminator rank >= alpha" is a range
/// scan.
class MatchingState {
public:
    using IndexEntry = std::pair<Rank, VertexId>;  // (eliminator rank, neighbor)
    using ElimIndex = absl::btree_set<IndexEntry>;

    MatchingState() = default;

    explicit MatchingState(std::size_t n)
        : mate_(n, kNoVertex), k_(n, Rank::sentinel()), index_(n) {}

    static MatchingState build_static(std::size_t n, std::span<const std::pair<EdgeKey, Rank>> edges) {
        MatchingState s(n);
        std::vector<std::pair<EdgeKey, Rank>> sorted(edges.begin(), edges.end());
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
        s.edges_.reserve(sorted.size());
        for (const auto& [e, r] : sorted) {
            s.check_edge(e, r);
            if (!s.edges_.emplace(e.code(), EdgeSlot{r, r}).second) {
                throw DuplicateEdgeError("duplicate edge " + to_string(e));
            }
            if (s.mate_[e.lo] == kNoVertex && s.mate_[e.hi] == kNoVertex) {
                s.mate_[e.lo] = e.hi;
                s.mate_[e.hi] = e.lo;
                s.k_[e.lo] = r;
                s.k_[e.hi] = r;
                ++s.matched_count_;
            }
        }
        for (auto& [code, slot] : s.edges_) {
            const EdgeKey e = EdgeKey::from_code(code);
            slot.elim = std::min(s.k_[e.lo], s.k_[e.hi]);
            s.index_[e.lo].emplace(slot.elim, e.hi);
            s.index_[e.hi].emplace(slot.elim, e.lo);
        }
        return s;
    }

    DeltaList apply_insert(EdgeKey e, Rank r) {
        check_edge(e, r);
        if (edges_.count(e.code()) != 0) throw DuplicateEdgeError("duplicate edge " + to_string(e));
        const Rank elim = std::min(k_[e.lo], k_[e.hi]);
        edges_.emplace(e.code(), EdgeSlot{r, elim});
        index_[e.lo].emplace(elim, e.hi);
        index_[e.hi].emplace(elim, e.lo);

        DeltaList delta;
        // Greedy prefix: the matching below rank r is unaffected, so e enters
        // iff both endpoints are free or matched above r.
        if (r < k_[e.lo] && r < k_[e.hi]) {
            std::set<Rank> pending{r};
            repair(pending, delta);
        }
        return delta;
    }

    DeltaList apply_delete(EdgeKey e) {
        auto it = edges_.find(e.code());
        if (it == edges_.end()) throw EdgeNotFoundError("edge " + to_string(e) + " is not present");
        const EdgeSlot slot = it->second;
        index_[e.lo].erase({slot.elim, e.hi});
        index_[e.hi].erase({slot.elim, e.lo});
        edges_.erase(it);

        DeltaList delta;
        if (mate_[e.lo] != e.hi) return delta;

        mate_[e.lo] = kNoVertex;
        mate_[e.hi] = kNoVertex;
        --matched_count_;
        delta.left.push_back(e);
        std::set<Rank> pending;
        collect_blocked(e.lo, slot.rank, pending);
        collect_blocked(e.hi, slot.rank, pending);
        set_k(e.lo, Rank::sentinel());
        set_k(e.hi, Rank::sentinel());
        repair(pending, delta);
        return delta;
    }

    /// Incident edges of v whose eliminator rank is at least `threshold`.
    std::vector<std::pair<EdgeKey, Rank>> neighbors_above(VertexId v, const Rank& threshold) const {
        std::vector<std::pair<EdgeKey, Rank>> out;
        const auto& idx = index_.at(v);
        for (auto it = idx.lower_bound({threshold, 0}); it != idx.end(); ++it) {
            out.emplace_back(EdgeKey::make(v, it->second), it->first);
        }
        return out;
    }

    std::size_t vertex_count() const { return mate_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t size() const { return matched_count_; }

    bool contains(EdgeKey e) const { return edges_.count(e.code()) != 0; }
    bool is_matched(EdgeKey e) const { return mate_.at(e.lo) == e.hi; }
    VertexId mate(VertexId v) const { return mate_.at(v); }

    std::optional<EdgeKey> matched_edge(VertexId v) const {
        if (mate_.at(v) == kNoVertex) return std::nullopt;
        return EdgeKey::make(v, mate_[v]);
    }

    /// k(v): rank of v's matched edge, sentinel when unmatched.
    const Rank& matched_rank(VertexId v) const { return k_.at(v); }

    const Rank& rank(EdgeKey e) const { return slot(e).rank; }
    const Rank& eliminator_rank(EdgeKey e) const { return slot(e).elim; }

    const ElimIndex& elim_index(VertexId v) const { return index_.at(v); }
    std::size_t degree(VertexId v) const { return index_.at(v).size(); }

    std::vector<VertexId> neighbors(VertexId v) const {
        std::vector<VertexId> out;
        out.reserve(index_.at(v).size());
        for (const auto& [elim, u] : index_[v]) out.push_back(u);
        return out;
    }

    std::vector<EdgeKey> matching() const {
        std::vector<EdgeKey> out;
        out.reserve(matched_count_);
        for (VertexId v = 0; v < mate_.size(); ++v) {
            if (mate_[v] != kNoVertex && v < mate_[v]) out.push_back(EdgeKey{v, mate_[v]});
        }
        return out;
    }

    std::vector<EdgeKey> edges() const {
        std::vector<EdgeKey> out;
        out.reserve(edges_.size());
        for (const auto& [code, s] : edges_) out.push_back(EdgeKey::from_code(code));
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<std::pair<EdgeKey, Rank>> ranked_edges() const {
        std::vector<std::pair<EdgeKey, Rank>> out;
        out.reserve(edges_.size());
        for (const auto& [code, s] : edges_) out.emplace_back(EdgeKey::from_code(code), s.rank);
        std::sort(out.begin(), out.end());
        return out;
    }

    friend bool operator==(const MatchingState& a, const MatchingState& b) {
        return a.matched_count_ == b.matched_count_ && a.mate_ == b.mate_ && a.k_ == b.k_ &&
               a.edges_ == b.edges_ && a.index_ == b.index_;
    }

private:
    struct EdgeSlot {
        Rank rank;
        Rank elim;
        bool operator==(const EdgeSlot&) const = default;
    };

    const EdgeSlot& slot(EdgeKey e) const {
        auto it = edges_.find(e.code());
        if (it == edges_.end()) throw EdgeNotFoundError("edge " + to_string(e) + " is not present");
        return it->second;
    }

    void check_edge(const EdgeKey& e, const Rank& r) const {
        if (e.lo >= e.hi || e.hi >= mate_.size()) throw ConfigError("invalid edge " + to_string(e));
        if (!(r.tiebreak == e)) throw ConfigError("rank tiebreak of " + to_string(e) + " does not match");
    }

    // Queue every edge at v whose current eliminator is the edge ranked `blocker`.
    void collect_blocked(VertexId v, const Rank& blocker, std::set<Rank>& pending) const {
        const auto& idx = index_[v];
        for (auto it = idx.lower_bound({blocker, 0}); it != idx.end() && it->first == blocker; ++it) {
            const EdgeKey g = EdgeKey::make(v, it->second);
            pending.insert(edges_.at(g.code()).rank);
        }
    }

    // Sets k(v) and re-keys incident edges whose eliminator may have moved.
    // Only edges with eliminator rank >= min(old, new) can change.
    void set_k(VertexId v, const Rank& value) {
        const Rank old = k_[v];
        k_[v] = value;
        if (old == value) return;
        const Rank lower = std::min(old, value);
        auto& idx = index_[v];
        // Every entry from `lower` up keeps an eliminator >= lower, so the
        // tail of v's index is rebuilt in one sorted pass.
        const auto from = idx.lower_bound({lower, 0});
        rekey_.clear();
        for (auto it = from; it != idx.end(); ++it) rekey_.push_back(*it);
        if (rekey_.empty()) return;
        idx.erase(from, idx.end());
        for (IndexEntry& entry : rekey_) {
            const VertexId u = entry.second;
            EdgeSlot& s = edges_.at(EdgeKey::make(v, u).code());
            const Rank elim = std::min(value, k_[u]);
            if (elim != s.elim) {
                auto& theirs = index_[u];
                theirs.erase({s.elim, v});
                theirs.emplace(elim, v);
                s.elim = elim;
            }
            entry.first = elim;
        }
        std::sort(rekey_.begin(), rekey_.end());
        for (const IndexEntry& entry : rekey_) idx.insert(idx.end(), entry);
    }

    // Settles candidate edges in increasing rank order. Edges below the
    // current rank are final; higher matched edges are tentative and get
    // evicted when a lower incident edge enters.
    void repair(std::set<Rank>& pending, DeltaList& delta) {
        while (!pending.empty()) {
            const Rank r = *pending.begin();
            pending.erase(pending.begin());
            ++delta.pops;
            const EdgeKey g = r.tiebreak;
            if (edges_.count(g.code()) == 0 || mate_[g.lo] == g.hi) continue;
            if (k_[g.lo] < r || k_[g.hi] < r) continue;

            std::pair<VertexId, Rank> freed[2];
            int freed_count = 0;
            for (VertexId w : {g.lo, g.hi}) {
                const VertexId old_mate = mate_[w];
                if (old_mate == kNoVertex) continue;
                const Rank evicted = k_[w];
                mate_[w] = kNoVertex;
                mate_[old_mate] = kNoVertex;
                --matched_count_;
                delta.left.push_back(EdgeKey::make(w, old_mate));
                collect_blocked(old_mate, evicted, pending);
                freed[freed_count++] = {old_mate, evicted};
            }
            mate_[g.lo] = g.hi;
            mate_[g.hi] = g.lo;
            ++matched_count_;
            delta.joined.push_back(g);
            for (int i = 0; i < freed_count; ++i) set_k(freed[i].first, Rank::sentinel());
            set_k(g.lo, r);
            set_k(g.hi, r);
        }
    }

    std::vector<VertexId> mate_;
    std::vector<Rank> k_;
    std::vector<ElimIndex> index_;
    std::unordered_map<std::uint64_t, EdgeSlot> edges_;
    std::size_t matched_count_ = 0;
    std::vector<IndexEntry> rekey_;
};

}  // namespace dynmatch
