#include <gtest/gtest.h>

#include <map>
#include <random>

#include "dynmatch/rgmm.hpp"

using namespace dynmatch;

namespace {

Rank at(double x, VertexId u, VertexId v) { return Rank::from_double(x, EdgeKey::make(u, v)); }

// Straight from the definition: scan by rank, take an edge iff both ends free;
// the eliminator of e is the lowest-rank matched edge touching e.
struct NaiveGreedy {
    std::vector<VertexId> mate;
    std::map<EdgeKey, Rank> elim;
};

NaiveGreedy naive(std::size_t n, const std::map<EdgeKey, Rank>& edges) {
    std::vector<std::pair<Rank, EdgeKey>> order;
    for (const auto& [e, r] : edges) order.emplace_back(r, e);
    std::sort(order.begin(), order.end());
    NaiveGreedy g;
    g.mate.assign(n, kNoVertex);
    std::vector<Rank> k(n, Rank::sentinel());
    for (const auto& [r, e] : order) {
        if (g.mate[e.lo] == kNoVertex && g.mate[e.hi] == kNoVertex) {
            g.mate[e.lo] = e.hi;
            g.mate[e.hi] = e.lo;
            k[e.lo] = r;
            k[e.hi] = r;
        }
    }
    for (const auto& [e, r] : edges) {
        Rank best = Rank::sentinel();
        for (const auto& [f, rf] : edges) {
            if (g.mate[f.lo] != f.hi) continue;
            if (f.touches(e.lo) || f.touches(e.hi)) best = std::min(best, rf);
        }
        g.elim[e] = best;
    }
    return g;
}

std::vector<std::pair<EdgeKey, Rank>> as_vec(const std::map<EdgeKey, Rank>& m) { return {m.begin(), m.end()}; }

void expect_matches_naive(const MatchingState& s, std::size_t n, const std::map<EdgeKey, Rank>& edges) {
    const NaiveGreedy g = naive(n, edges);
    for (VertexId v = 0; v < n; ++v) ASSERT_EQ(s.mate(v), g.mate[v]) << "vertex " << v;
    for (const auto& [e, r] : edges) ASSERT_EQ(s.eliminator_rank(e), g.elim.at(e)) << to_string(e);
    for (VertexId v = 0; v < n; ++v) {
        ASSERT_EQ(s.elim_index(v).size(), s.degree(v));
        for (const auto& [el, u] : s.elim_index(v)) ASSERT_EQ(el, g.elim.at(EdgeKey::make(v, u)));
    }
}

}  // namespace

TEST(BuildStatic, PathTakesLowerRank) {
    std::vector<std::pair<EdgeKey, Rank>> es{{EdgeKey{1, 2}, at(0.2, 1, 2)}, {EdgeKey{2, 3}, at(0.5, 2, 3)}};
    const auto s = MatchingState::build_static(4, es);
    EXPECT_EQ(s.mate(1), 2u);
    EXPECT_EQ(s.mate(3), kNoVertex);
    EXPECT_EQ(s.eliminator_rank(EdgeKey{2, 3}), at(0.2, 1, 2));
}

TEST(BuildStatic, Triangle) {
    std::vector<std::pair<EdgeKey, Rank>> es{
        {EdgeKey{0, 1}, at(0.1, 0, 1)}, {EdgeKey{1, 2}, at(0.2, 1, 2)}, {EdgeKey{0, 2}, at(0.3, 0, 2)}};
    const auto s = MatchingState::build_static(3, es);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_TRUE(s.is_matched(EdgeKey{0, 1}));
    EXPECT_EQ(s.eliminator_rank(EdgeKey{1, 2}), at(0.1, 0, 1));
    EXPECT_EQ(s.eliminator_rank(EdgeKey{0, 2}), at(0.1, 0, 1));
}

TEST(BuildStatic, EmptyGraph) {
    const auto s = MatchingState::build_static(5, {});
    EXPECT_EQ(s.size(), 0u);
    for (VertexId v = 0; v < 5; ++v) EXPECT_TRUE(s.matched_rank(v).is_sentinel());
}

TEST(ApplyInsert, SingleEdge) {
    MatchingState s(3);
    const auto d = s.apply_insert(EdgeKey{1, 2}, at(0.2, 1, 2));
    ASSERT_EQ(d.joined.size(), 1u);
    EXPECT_EQ(d.joined[0], (EdgeKey{1, 2}));
    EXPECT_TRUE(d.left.empty());
}

TEST(ApplyInsert, LowerRankPreempts) {
    MatchingState s(4);
    s.apply_insert(EdgeKey{2, 3}, at(0.5, 2, 3));
    const auto d = s.apply_insert(EdgeKey{1, 2}, at(0.2, 1, 2));
    EXPECT_EQ(d.left, (std::vector<EdgeKey>{{2, 3}}));
    EXPECT_EQ(d.joined, (std::vector<EdgeKey>{{1, 2}}));
    EXPECT_EQ(s.mate(3), kNoVertex);
}

TEST(ApplyInsert, DuplicateThrows) {
    MatchingState s(3);
    s.apply_insert(EdgeKey{0, 1}, at(0.2, 0, 1));
    EXPECT_THROW(s.apply_insert(EdgeKey{0, 1}, at(0.3, 0, 1)), DuplicateEdgeError);
}

TEST(ApplyDelete, MatchedSingleEdge) {
    MatchingState s(2);
    s.apply_insert(EdgeKey{0, 1}, at(0.4, 0, 1));
    const auto d = s.apply_delete(EdgeKey{0, 1});
    EXPECT_EQ(d.left, (std::vector<EdgeKey>{{0, 1}}));
    EXPECT_TRUE(d.joined.empty());
}

TEST(ApplyDelete, UnmatchedEdgeIsQuiet) {
    MatchingState s(3);
    s.apply_insert(EdgeKey{0, 1}, at(0.1, 0, 1));
    s.apply_insert(EdgeKey{1, 2}, at(0.2, 1, 2));
    const auto d = s.apply_delete(EdgeKey{1, 2});
    EXPECT_TRUE(d.empty());
    EXPECT_EQ(s.elim_index(2).size(), 0u);
    EXPECT_EQ(s.elim_index(1).size(), 1u);
}

TEST(ApplyDelete, AlternatingCascade) {
    // path 1-2-3-4 with ranks 0.1, 0.2, 0.3
    MatchingState s(5);
    s.apply_insert(EdgeKey{1, 2}, at(0.1, 1, 2));
    s.apply_insert(EdgeKey{2, 3}, at(0.2, 2, 3));
    s.apply_insert(EdgeKey{3, 4}, at(0.3, 3, 4));
    ASSERT_EQ(s.size(), 2u);
    const auto d = s.apply_delete(EdgeKey{1, 2});
    EXPECT_EQ(d.left, (std::vector<EdgeKey>{{1, 2}, {3, 4}}));
    EXPECT_EQ(d.joined, (std::vector<EdgeKey>{{2, 3}}));
}

TEST(ApplyDelete, AbsentThrows) {
    MatchingState s(3);
    EXPECT_THROW(s.apply_delete(EdgeKey{0, 1}), EdgeNotFoundError);
}

TEST(NeighborsAbove, RangeScan) {
    MatchingState s(5);
    for (VertexId v = 1; v <= 4; ++v) s.apply_insert(EdgeKey{0, v}, at(0.1 * v, 0, v));
    EXPECT_EQ(s.neighbors_above(0, Rank::floor(0)).size(), 4u);
    EXPECT_TRUE(s.neighbors_above(0, Rank::from_double(0.2, EdgeKey{0, 0})).empty());
    EXPECT_TRUE(s.neighbors_above(0, Rank::sentinel()).empty());
}

TEST(RandomStreams, SmallGraphsMatchDefinition) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t n = 8;
        std::map<EdgeKey, Rank> present;
        MatchingState s(n);
        std::uniform_int_distribution<VertexId> pick(0, n - 1);
        for (int step = 0; step < 50; ++step) {
            VertexId u = pick(rng), v = pick(rng);
            if (u == v) continue;
            const EdgeKey e = EdgeKey::make(u, v);
            const MatchingState before = s;
            if (present.count(e)) {
                const Rank r = present.at(e);
                present.erase(e);
                const auto d = s.apply_delete(e);
                // Localization: edges whose eliminator sat below r are untouched.
                for (const auto& [f, rf] : present) {
                    if (before.eliminator_rank(f) < r) {
                        ASSERT_EQ(s.eliminator_rank(f), before.eliminator_rank(f));
                        ASSERT_EQ(s.is_matched(f), before.is_matched(f));
                    }
                }
                (void)d;
            } else {
                const Rank r{rng(), e};
                present[e] = r;
                s.apply_insert(e, r);
                for (const auto& [f, rf] : present) {
                    if (f == e) continue;
                    if (before.eliminator_rank(f) < r) {
                        ASSERT_EQ(s.eliminator_rank(f), before.eliminator_rank(f));
                    }
                }
            }
            expect_matches_naive(s, n, present);
            ASSERT_TRUE(s == MatchingState::build_static(n, as_vec(present)));
        }
    }
}

TEST(RandomStreams, DeltaListsReplayToNewMatching) {
    std::mt19937_64 rng(99);
    const std::size_t n = 40;
    std::map<EdgeKey, Rank> present;
    MatchingState s(n);
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    for (int step = 0; step < 3000; ++step) {
        VertexId u = pick(rng), v = pick(rng);
        if (u == v) continue;
        const EdgeKey e = EdgeKey::make(u, v);
        auto old = s.matching();
        std::set<EdgeKey> m(old.begin(), old.end());
        DeltaList d;
        if (present.count(e)) {
            present.erase(e);
            d = s.apply_delete(e);
        } else {
            const Rank r{rng(), e};
            present[e] = r;
            d = s.apply_insert(e, r);
        }
        for (const auto& f : d.left) ASSERT_EQ(m.erase(f), 1u);
        for (const auto& f : d.joined) ASSERT_TRUE(m.insert(f).second);
        const auto now = s.matching();
        ASSERT_EQ(std::vector<EdgeKey>(m.begin(), m.end()), now);
        // Maximality.
        for (const auto& [f, r] : present) ASSERT_FALSE(s.mate(f.lo) == kNoVertex && s.mate(f.hi) == kNoVertex);
    }
    EXPECT_TRUE(s == MatchingState::build_static(n, as_vec(present)));
}
