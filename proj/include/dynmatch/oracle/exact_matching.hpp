#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "dynmatch/core_graph.hpp"

namespace dynmatch::oracle {

class OracleLimitError : public Error {
public:
    using Error::Error;
};

inline constexpr std::size_t kDefaultOracleLimit = 2000;

struct ExactMatchingResult {
    std::size_t size = 0;
    std::vector<EdgeKey> witness;
};

/// Edmonds' blossom search over a whole forest rooted at every free vertex.
/// Each call to `augment_once` either augments the current matching by one
/// edge or proves it maximum.
class BlossomMatcher {
public:
    explicit BlossomMatcher(std::size_t n) : adj_(n), match_(n, -1), p_(n), base_(n), even_(n), root_(n),
                                             blossom_(n), mark_(n, 0) {}

    std::size_t vertex_count() const { return adj_.size(); }

    void add_edge(VertexId u, VertexId v) {
        adj_.at(u).push_back(static_cast<int>(v));
        adj_.at(v).push_back(static_cast<int>(u));
    }

    void remove_edge(VertexId u, VertexId v) {
        erase_one(adj_.at(u), static_cast<int>(v));
        erase_one(adj_.at(v), static_cast<int>(u));
        if (match_[u] == static_cast<int>(v)) {
            match_[u] = -1;
            match_[v] = -1;
            --size_;
        }
    }

    /// Seeds the matching; pairs must be edges of the graph.
    void set_matching(std::span<const EdgeKey> m) {
        std::fill(match_.begin(), match_.end(), -1);
        size_ = 0;
        for (const EdgeKey& e : m) {
            if (match_.at(e.lo) != -1 || match_.at(e.hi) != -1) throw ConsistencyError("warm start is not a matching");
            match_[e.lo] = static_cast<int>(e.hi);
            match_[e.hi] = static_cast<int>(e.lo);
            ++size_;
        }
    }

    bool augment_once() {
        const std::size_t n = adj_.size();
        for (std::size_t i = 0; i < n; ++i) {
            p_[i] = -1;
            base_[i] = static_cast<int>(i);
            even_[i] = 0;
            root_[i] = -1;
        }
        queue_.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (match_[i] == -1) {
                even_[i] = 1;
                root_[i] = static_cast<int>(i);
                queue_.push_back(static_cast<int>(i));
            }
        }
        for (std::size_t head = 0; head < queue_.size(); ++head) {
            const int v = queue_[head];
            for (int to : adj_[static_cast<std::size_t>(v)]) {
                if (base_[v] == base_[to] || match_[v] == to) continue;
                if (even_[to]) {
                    if (root_[to] != root_[v]) {
                        flip(v);
                        flip(to);
                        match_[v] = to;
                        match_[to] = v;
                        ++size_;
                        return true;
                    }
                    contract(v, to);
                } else if (p_[to] == -1) {
                    p_[to] = v;
                    root_[to] = root_[v];
                    const int m = match_[to];
                    even_[m] = 1;
                    root_[m] = root_[v];
                    queue_.push_back(m);
                }
            }
        }
        return false;
    }

    std::size_t maximize() {
        while (augment_once()) {
        }
        return size_;
    }

    std::size_t size() const { return size_; }
    int mate(VertexId v) const { return match_.at(v); }

    std::vector<EdgeKey> matching() const {
        std::vector<EdgeKey> out;
        for (std::size_t v = 0; v < match_.size(); ++v) {
            if (match_[v] > static_cast<int>(v)) out.push_back(EdgeKey{static_cast<VertexId>(v), static_cast<VertexId>(match_[v])});
        }
        return out;
    }

private:
    static void erase_one(std::vector<int>& a, int x) {
        auto it = std::find(a.begin(), a.end(), x);
        if (it == a.end()) throw EdgeNotFoundError("oracle edge not present");
        *it = a.back();
        a.pop_back();
    }

    // Flips the tree path from even vertex w to its root; w ends up free.
    void flip(int w) {
        int m = match_[w];
        while (m != -1) {
            const int nxt = p_[m];
            const int nm = match_[nxt];
            match_[m] = nxt;
            match_[nxt] = m;
            m = nm;
        }
    }

    int lca(int a, int b) {
        ++stamp_;
        while (true) {
            a = base_[a];
            mark_[a] = stamp_;
            if (match_[a] == -1) break;
            a = p_[match_[a]];
        }
        while (true) {
            b = base_[b];
            if (mark_[b] == stamp_) return b;
            b = p_[match_[b]];
        }
    }

    void mark_path(int v, int b, int child) {
        while (base_[v] != b) {
            blossom_[base_[v]] = 1;
            blossom_[base_[match_[v]]] = 1;
            p_[v] = child;
            child = match_[v];
            v = p_[match_[v]];
        }
    }

    void contract(int v, int to) {
        const int cur = lca(v, to);
        std::fill(blossom_.begin(), blossom_.end(), 0);
        mark_path(v, cur, to);
        mark_path(to, cur, v);
        const int r = root_[v];
        for (std::size_t i = 0; i < adj_.size(); ++i) {
            if (!blossom_[base_[i]]) continue;
            base_[i] = cur;
            if (!even_[i]) {
                even_[i] = 1;
                root_[i] = r;
                queue_.push_back(static_cast<int>(i));
            }
        }
    }

    std::vector<std::vector<int>> adj_;
    std::vector<int> match_;
    std::vector<int> p_;
    std::vector<int> base_;
    std::vector<std::uint8_t> even_;
    std::vector<int> root_;
    std::vector<std::uint8_t> blossom_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t stamp_ = 0;
    std::vector<int> queue_;
    std::size_t size_ = 0;
};

/// Maximum matching of an arbitrary graph, optionally warm-started.
inline ExactMatchingResult max_matching_exact(std::size_t n, std::span<const EdgeKey> edges,
                                              std::span<const EdgeKey> warm = {},
                                              std::size_t limit = kDefaultOracleLimit) {
    if (n > limit) {
        throw OracleLimitError("exact oracle limited to " + std::to_string(limit) + " vertices, got " +
                               std::to_string(n));
    }
    BlossomMatcher bm(n);
    for (const EdgeKey& e : edges) bm.add_edge(e.lo, e.hi);
    bm.set_matching(warm);
    bm.maximize();
    return ExactMatchingResult{bm.size(), bm.matching()};
}

/// True iff `m` admits an augmenting path in the graph.
inline bool has_augmenting_path(std::size_t n, std::span<const EdgeKey> edges, std::span<const EdgeKey> m) {
    BlossomMatcher bm(n);
    for (const EdgeKey& e : edges) bm.add_edge(e.lo, e.hi);
    bm.set_matching(m);
    return bm.augment_once();
}

/// Exact maximum matching kept current under edge updates. Every update
/// changes mu by at most one, so one search phase restores maximality.
class IncrementalMaxMatching {
public:
    explicit IncrementalMaxMatching(std::size_t n, std::size_t limit = kDefaultOracleLimit) : bm_(check(n, limit)) {}

    std::size_t insert(EdgeKey e) {
        bm_.add_edge(e.lo, e.hi);
        bm_.augment_once();
        return bm_.size();
    }

    std::size_t erase(EdgeKey e) {
        const bool was_matched = bm_.mate(e.lo) == static_cast<int>(e.hi);
        bm_.remove_edge(e.lo, e.hi);
        if (was_matched) bm_.augment_once();
        return bm_.size();
    }

    std::size_t size() const { return bm_.size(); }
    std::vector<EdgeKey> matching() const { return bm_.matching(); }

private:
    static std::size_t check(std::size_t n, std::size_t limit) {
        if (n > limit) throw OracleLimitError("exact oracle limited to " + std::to_string(limit) + " vertices");
        return n;
    }

    BlossomMatcher bm_;
};

}  // namespace dynmatch::oracle
