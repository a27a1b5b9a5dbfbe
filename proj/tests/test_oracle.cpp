#include <gtest/gtest.h>

#include <random>

#include "dynmatch/oracle/exact_matching.hpp"
#include "dynmatch/oracle/static_reference.hpp"
#include "dynmatch/oracle/validators.hpp"

using namespace dynmatch;
using namespace dynmatch::oracle;

namespace {

// Maximum matching by DP over vertex subsets: f(S) = best within S, where the
// lowest vertex of S is either skipped or matched to a neighbor in S.
std::size_t brute_mu(std::size_t n, const std::vector<EdgeKey>& edges) {
    std::vector<std::uint32_t> adj(n, 0);
    for (const auto& e : edges) {
        adj[e.lo] |= 1u << e.hi;
        adj[e.hi] |= 1u << e.lo;
    }
    std::vector<std::uint8_t> f(std::size_t{1} << n, 0);
    for (std::uint32_t s = 1; s < (1u << n); ++s) {
        const int v = __builtin_ctz(s);
        const std::uint32_t rest = s & ~(1u << v);
        std::uint8_t best = f[rest];
        for (std::uint32_t cand = adj[v] & rest; cand != 0; cand &= cand - 1) {
            const int u = __builtin_ctz(cand);
            best = std::max<std::uint8_t>(best, static_cast<std::uint8_t>(1 + f[rest & ~(1u << u)]));
        }
        f[s] = best;
    }
    return f[(1u << n) - 1];
}

bool is_matching_of(std::size_t n, const std::vector<EdgeKey>& m, const std::vector<EdgeKey>& edges) {
    std::set<EdgeKey> es(edges.begin(), edges.end());
    std::vector<int> used(n, 0);
    for (const auto& e : m) {
        if (!es.count(e) || used[e.lo]++ || used[e.hi]++) return false;
    }
    return true;
}

std::vector<EdgeKey> petersen() {
    std::vector<EdgeKey> es;
    for (VertexId i = 0; i < 5; ++i) {
        es.push_back(EdgeKey::make(i, (i + 1) % 5));
        es.push_back(EdgeKey::make(i, i + 5));
        es.push_back(EdgeKey::make(i + 5, (i + 2) % 5 + 5));
    }
    return es;
}

}  // namespace

TEST(ExactMatching, SmallKnownGraphs) {
    EXPECT_EQ(max_matching_exact(4, std::vector<EdgeKey>{{0, 1}, {1, 2}, {2, 3}}).size, 2u);
    EXPECT_EQ(max_matching_exact(3, std::vector<EdgeKey>{{0, 1}, {1, 2}, {0, 2}}).size, 1u);
    const auto p = petersen();
    const auto r = max_matching_exact(10, p);
    EXPECT_EQ(r.size, 5u);
    EXPECT_EQ(brute_mu(10, p), 5u);
    EXPECT_TRUE(is_matching_of(10, r.witness, p));
    EXPECT_FALSE(has_augmenting_path(10, p, r.witness));
}

TEST(ExactMatching, LimitEnforced) {
    EXPECT_THROW(max_matching_exact(2001, std::vector<EdgeKey>{}), OracleLimitError);
    EXPECT_NO_THROW(max_matching_exact(10, std::vector<EdgeKey>{}, {}, 10));
}

TEST(ExactMatching, AgreesWithBruteForce) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 400; ++t) {
        const std::size_t n = 2 + rng() % 13;
        const double q = 0.1 + 0.6 * unit_double(rng);
        std::vector<EdgeKey> es;
        for (VertexId u = 0; u < n; ++u) {
            for (VertexId v = u + 1; v < n; ++v) {
                if (unit_double(rng) < q) es.push_back(EdgeKey{u, v});
            }
        }
        const auto r = max_matching_exact(n, es);
        ASSERT_EQ(r.size, brute_mu(n, es)) << "trial " << t;
        ASSERT_TRUE(is_matching_of(n, r.witness, es));
        ASSERT_FALSE(has_augmenting_path(n, es, r.witness));
    }
}

TEST(ExactMatching, WarmStartFromGreedy) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 14;
        auto es = random_graph(n, 20, rng);
        const auto greedy = MatchingState::build_static(n, random_ranking(es, rng)).matching();
        ASSERT_EQ(max_matching_exact(n, es, greedy).size, brute_mu(n, es));
    }
}

TEST(IncrementalMaxMatching, TracksFromScratch) {
    std::mt19937_64 rng(21);
    const std::size_t n = 60;
    IncrementalMaxMatching inc(n);
    std::set<EdgeKey> present;
    for (int step = 0; step < 3000; ++step) {
        const VertexId u = rng() % n, v = rng() % n;
        if (u == v) continue;
        const EdgeKey e = EdgeKey::make(u, v);
        if (present.count(e)) {
            present.erase(e);
            inc.erase(e);
        } else {
            present.insert(e);
            inc.insert(e);
        }
        if (step % 25 == 0) {
            const std::vector<EdgeKey> es(present.begin(), present.end());
            ASSERT_EQ(inc.size(), max_matching_exact(n, es).size);
            ASSERT_TRUE(is_matching_of(n, inc.matching(), es));
        }
    }
}

TEST(Sparsification, ExtremeThresholds) {
    std::mt19937_64 rng(2);
    const auto es = random_graph(50, 200, rng);
    const auto s = MatchingState::build_static(50, random_ranking(es, rng));
    std::vector<std::size_t> deg(50, 0);
    for (const auto& e : es) ++deg[e.lo], ++deg[e.hi];
    EXPECT_EQ(filtered_max_degree(s, 0.0), *std::max_element(deg.begin(), deg.end()));
    EXPECT_EQ(filtered_max_degree(s, 1.0), 0u);
}

TEST(Sparsification, SmallAuditPasses) {
    const auto rep = audit_sparsification(300, 3000, 3, {0.25, 0.125, 1.0 / 32}, 4);
    EXPECT_TRUE(rep.pass()) << rep.fitted_c;
    EXPECT_EQ(rep.max_degree.size(), 3u);
    EXPECT_GE(rep.max_degree[2], rep.max_degree[0]);
}

TEST(VertexSampling, DegenerateCases) {
    BipartiteInstance g;
    g.nv = 1;
    g.nu = 1;
    g.edges = {EdgeKey{0, 1}};
    g.matching = g.edges;
    g.ranking = {{EdgeKey{0, 1}, Rank{5, EdgeKey{0, 1}}}};
    const auto all = validate_vertex_sampling(g, 1.0, 50, 1);
    EXPECT_DOUBLE_EQ(all.mean, 1.0);
    EXPECT_DOUBLE_EQ(all.bound, -1.0);
    const auto none = validate_vertex_sampling(g, 0.0, 50, 1);
    EXPECT_DOUBLE_EQ(none.mean, 0.0);
    EXPECT_DOUBLE_EQ(none.bound, 0.0);
}

TEST(VertexSampling, CompleteBipartiteBound) {
    std::mt19937_64 rng(3);
    const auto g = complete_bipartite(8, rng);
    const auto st = validate_vertex_sampling(g, 0.25, 4000, 9);
    EXPECT_DOUBLE_EQ(st.bound, 1.0);
    EXPECT_TRUE(st.pass());
    // every sampled V vertex finds a free U vertex in K_{8,8}
    EXPECT_NEAR(st.mean, 2.0, 4 * st.stderr_);
}

TEST(PartitionAugmentation, CoefficientArithmetic) {
    const double p = 0.03;
    EXPECT_NEAR(0.99 * p / 4 - 4 * p * p, 0.003825, 1e-15);
    AugmentationGadget empty;
    const auto st = validate_partition_augmentation(empty, p, 3, 1, 1.0);
    EXPECT_LE(st.bound, 0.0);
    EXPECT_TRUE(st.pass());
}

TEST(PartitionAugmentation, GadgetHasExpectedBaseMatching) {
    std::mt19937_64 rng(4);
    const double lo = 0.05, hi = 0.25;
    const auto g = make_augmentation_gadget(300, 2, lo, hi, rng);
    const auto s = MatchingState::build_static(g.vertex_count(), g.base_ranking);
    ASSERT_EQ(s.size(), 300u);
    std::vector<EdgeKey> opt;
    for (std::size_t k = 0; k < g.count; ++k) {
        ASSERT_TRUE(s.is_matched(EdgeKey{g.b(k), g.c(k)}));
        const double x = s.matched_rank(g.b(k)).as_double();
        ASSERT_GT(x, lo);
        ASSERT_LE(x, hi);
        opt.push_back(EdgeKey{g.a(k), g.b(k)});
        opt.push_back(EdgeKey{g.c(k), g.d(k)});
    }
    EXPECT_EQ(max_matching_exact(g.vertex_count(), g.edges).size, opt.size());
    EXPECT_EQ(count_3_augmentable(g.vertex_count(), s.matching(), opt), 300u);
}

TEST(PartitionAugmentation, SmallRunMeetsBound) {
    std::mt19937_64 rng(6);
    const auto g = make_augmentation_gadget(2000, 2, 0.05, 0.25, rng);
    const auto st = validate_partition_augmentation(g, 0.03, 100, 8, 0.0, 0.003825);
    EXPECT_NEAR(st.bound, 7.65, 1e-9);
    EXPECT_TRUE(st.pass()) << st.mean;
}

TEST(PivotLevel, SpecExamples) {
    const std::uint64_t a[] = {0, 1000};
    EXPECT_EQ(find_pivot_level(a).level, 2);
    EXPECT_TRUE(find_pivot_level(a).ok());
    const std::uint64_t b[] = {1000, 0};
    EXPECT_EQ(find_pivot_level(b).level, 1);
    EXPECT_TRUE(find_pivot_level(b).ok());
    const std::uint64_t z[] = {0, 0};
    EXPECT_EQ(find_pivot_level(z).level, 0);
}

TEST(PivotLevel, BoundaryThreshold) {
    // L = 2, |M_0| = 2^26: level 1 needs |S_1| >= 2^{12-26} * 2^26 = 4096.
    const std::uint64_t total = std::uint64_t{1} << 26;
    const std::uint64_t at[] = {4096, total - 4096};
    EXPECT_EQ(find_pivot_level(at).level, 1);
    const std::uint64_t below[] = {4095, total - 4095};
    const auto r = find_pivot_level(below);
    EXPECT_EQ(r.level, 2);
    EXPECT_TRUE(r.ok());
}

TEST(Count3Augmentable, Basics) {
    const std::vector<EdgeKey> m0{{1, 2}}, opt{{0, 1}, {2, 3}};
    EXPECT_EQ(count_3_augmentable(4, m0, opt), 1u);
    EXPECT_EQ(count_3_augmentable(4, opt, opt), 0u);
    // a is matched in M_0 elsewhere: not a length-3 component
    const std::vector<EdgeKey> m0b{{1, 2}, {0, 4}}, optb{{0, 1}, {2, 3}};
    EXPECT_EQ(count_3_augmentable(5, m0b, optb), 0u);
}

TEST(Count3Augmentable, CliqueWithPendants) {
    std::mt19937_64 rng(12);
    const std::size_t half = 50, n = 2 * half;
    std::vector<EdgeKey> es;
    for (VertexId u = 0; u < half; ++u) {
        for (VertexId v = u + 1; v < half; ++v) es.push_back(EdgeKey{u, v});
        es.push_back(EdgeKey{u, static_cast<VertexId>(u + half)});
    }
    for (int t = 0; t < 20; ++t) {
        const auto m0 = MatchingState::build_static(n, random_ranking(es, rng)).matching();
        const auto opt = max_matching_exact(n, es);
        ASSERT_EQ(opt.size, half);
        const double mu = static_cast<double>(opt.size);
        const double delta = static_cast<double>(m0.size()) / mu - 0.5;
        const double cnt = static_cast<double>(count_3_augmentable(n, m0, opt.witness));
        ASSERT_GE(cnt + 1e-9, (0.5 - 3 * delta) * mu);
    }
}

TEST(StaticReference, EmptyAndSingleEdge) {
    InstanceConfig c;
    c.n = 6;
    c.delta_cap = 4;
    c.levels = 2;
    c.algo_seed = 1;
    Instance inst(c);
    auto ref = static_reference(inst);
    EXPECT_EQ(ref.base.size(), 0u);
    for (int i = 1; i <= 2; ++i) EXPECT_TRUE(ref.levels[i].graph.empty());
    const auto& rec = inst.admit_edge(2, 4);
    ref = static_reference(inst);
    EXPECT_EQ(ref.base.matching(), (std::vector<EdgeKey>{{2, 4}}));
    const int lvl = inst.level_of_rank(rec.rank(0));
    EXPECT_EQ(ref.levels[lvl].s.size(), 1u);
    for (int i = 1; i <= 2; ++i) EXPECT_TRUE(ref.levels[i].graph.empty());
    EXPECT_EQ(ref.union_mu, 1u);
}
