#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <unordered_set>
#include <vector>

#include "dynmatch/core_graph.hpp"
#include "dynmatch/final_match.hpp"
#include "dynmatch/rgmm.hpp"

namespace dynmatch::oracle {

/// Sample mean with its standard error and the bound it is compared to.
struct Statistic {
    double mean = 0.0;
    double stderr_ = 0.0;
    double bound = 0.0;
    std::size_t trials = 0;

    /// Passes unless the mean sits more than `sigmas` standard errors below the bound.
    bool pass(double sigmas = 3.0) const { return mean >= bound - sigmas * stderr_; }
};

class RunningMoments {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double standard_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// m distinct uniform edges on n vertices.
inline std::vector<EdgeKey> random_graph(std::size_t n, std::size_t m, std::mt19937_64& rng) {
    if (n < 2 || m > n * (n - 1) / 2) throw ConfigError("random_graph: too many edges requested");
    std::unordered_set<std::uint64_t> seen;
    std::vector<EdgeKey> out;
    out.reserve(m);
    std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(n - 1));
    while (out.size() < m) {
        const VertexId u = pick(rng);
        const VertexId v = pick(rng);
        if (u == v) continue;
        const EdgeKey e = EdgeKey::make(u, v);
        if (seen.insert(e.code()).second) out.push_back(e);
    }
    return out;
}

inline std::vector<std::pair<EdgeKey, Rank>> random_ranking(std::span<const EdgeKey> edges, std::mt19937_64& rng) {
    std::vector<std::pair<EdgeKey, Rank>> out;
    out.reserve(edges.size());
    for (const EdgeKey& e : edges) out.emplace_back(e, Rank{rng(), e});
    return out;
}

// ---------------------------------------------------------------------------
// Sparsification audit
// ---------------------------------------------------------------------------

struct AuditReport {
    std::size_t n = 0, m = 0, trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> thresholds;
    std::vector<std::size_t> max_degree;  // max over trials, per threshold
    double fitted_c = 0.0;                // max over thresholds of maxdeg * p / ln n
    double gate_c = 4.0;

    double bound(std::size_t k) const { return gate_c / thresholds[k] * std::log(static_cast<double>(n)); }
    bool pass() const { return fitted_c <= gate_c; }
};

/// Max degree of {e : eliminator rank of e > p} for one ranked graph.
inline std::size_t filtered_max_degree(const MatchingState& s, double p) {
    const std::uint64_t cut = Rank::fraction_to_fixed(p);
    std::vector<std::size_t> deg(s.vertex_count(), 0);
    std::size_t best = 0;
    for (const auto& [e, r] : s.ranked_edges()) {
        const Rank& elim = s.eliminator_rank(e);
        const bool keep = p <= 0.0 || (p < 1.0 && elim.value > cut);
        if (!keep) continue;
        best = std::max({best, ++deg[e.lo], ++deg[e.hi]});
    }
    return best;
}

inline AuditReport audit_sparsification(std::size_t n, std::size_t m, std::size_t trials,
                                        std::vector<double> thresholds, std::uint64_t seed, double gate_c = 4.0) {
    if (trials < 1) throw ConfigError("audit needs at least one trial");
    AuditReport rep;
    rep.n = n;
    rep.m = m;
    rep.trials = trials;
    rep.seed = seed;
    rep.gate_c = gate_c;
    rep.thresholds = std::move(thresholds);
    rep.max_degree.assign(rep.thresholds.size(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto edges = random_graph(n, m, rng);
        const auto ranked = random_ranking(edges, rng);
        const MatchingState s = MatchingState::build_static(n, ranked);
        for (std::size_t k = 0; k < rep.thresholds.size(); ++k) {
            rep.max_degree[k] = std::max(rep.max_degree[k], filtered_max_degree(s, rep.thresholds[k]));
        }
    }
    const double ln_n = std::log(static_cast<double>(n));
    for (std::size_t k = 0; k < rep.thresholds.size(); ++k) {
        const double p = rep.thresholds[k];
        if (p <= 0.0 || p >= 1.0) continue;
        rep.fitted_c = std::max(rep.fitted_c, static_cast<double>(rep.max_degree[k]) * p / ln_n);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Greedy under vertex sampling
// ---------------------------------------------------------------------------

/// Bipartite graph with sides V = [0, nv) and U = [nv, nv + nu).
struct BipartiteInstance {
    std::size_t nv = 0, nu = 0;
    std::vector<EdgeKey> edges;
    std::vector<EdgeKey> matching;                  // M
    std::vector<std::pair<EdgeKey, Rank>> ranking;  // pi over all edges

    std::size_t vertex_count() const { return nv + nu; }
};

/// Monte Carlo estimate of E[X] where X counts M edges whose V endpoint is
/// matched by greedy on G[W u U], W a p-sample of V.
inline Statistic validate_vertex_sampling(const BipartiteInstance& g, double p, std::size_t trials,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RunningMoments mom;
    std::vector<std::uint8_t> in_w(g.nv);
    std::vector<std::pair<EdgeKey, Rank>> sub;
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t v = 0; v < g.nv; ++v) in_w[v] = unit_double(rng) < p ? 1 : 0;
        sub.clear();
        for (const auto& [e, r] : g.ranking) {
            // lo is always the V endpoint since V ids precede U ids.
            if (in_w[e.lo]) sub.emplace_back(e, r);
        }
        const MatchingState s = MatchingState::build_static(g.vertex_count(), sub);
        std::size_t x = 0;
        for (const EdgeKey& e : g.matching) {
            if (s.mate(e.lo) != kNoVertex) ++x;
        }
        mom.add(static_cast<double>(x));
    }
    const double bound = p * (static_cast<double>(g.matching.size()) - 2.0 * p * static_cast<double>(g.nv));
    return Statistic{mom.mean(), mom.standard_error(), bound, trials};
}

inline BipartiteInstance complete_bipartite(std::size_t k, std::mt19937_64& rng) {
    BipartiteInstance g;
    g.nv = k;
    g.nu = k;
    for (VertexId a = 0; a < k; ++a) {
        for (VertexId b = 0; b < k; ++b) g.edges.push_back(EdgeKey{a, static_cast<VertexId>(k + b)});
        g.matching.push_back(EdgeKey{a, static_cast<VertexId>(k + a)});
    }
    g.ranking = random_ranking(g.edges, rng);
    return g;
}

/// Random bipartite graph with edge density q; M is a greedy matching under
/// an independent order so it is unrelated to pi.
inline BipartiteInstance random_bipartite(std::size_t nv, std::size_t nu, double q, std::mt19937_64& rng) {
    BipartiteInstance g;
    g.nv = nv;
    g.nu = nu;
    for (VertexId a = 0; a < nv; ++a) {
        for (VertexId b = 0; b < nu; ++b) {
            if (unit_double(rng) < q) g.edges.push_back(EdgeKey{a, static_cast<VertexId>(nv + b)});
        }
    }
    g.matching = MatchingState::build_static(g.vertex_count(), random_ranking(g.edges, rng)).matching();
    g.ranking = random_ranking(g.edges, rng);
    return g;
}

// ---------------------------------------------------------------------------
// Partition augmentation gadget
// ---------------------------------------------------------------------------

/// Disjoint paths a-b-c-d with the middle edge in M_0 at a chosen level, plus
/// noise edges from a/d vertices into other gadgets' b/c vertices. Ids of
/// gadget k are 4k..4k+3 in the order a, b, c, d, so b is the lower-ID
/// endpoint of bc.
struct AugmentationGadget {
    std::size_t count = 0;
    std::vector<EdgeKey> edges;
    std::vector<std::pair<EdgeKey, Rank>> base_ranking;  // pi_0

    std::size_t vertex_count() const { return 4 * count; }
    static VertexId a(std::size_t k) { return static_cast<VertexId>(4 * k); }
    static VertexId b(std::size_t k) { return static_cast<VertexId>(4 * k + 1); }
    static VertexId c(std::size_t k) { return static_cast<VertexId>(4 * k + 2); }
    static VertexId d(std::size_t k) { return static_cast<VertexId>(4 * k + 3); }
};

/// Builds the gadget family. Middle edges get pi_0 uniform in (lo, hi];
/// every other edge is ranked above hi so M_0 is exactly the middle edges.
inline AugmentationGadget make_augmentation_gadget(std::size_t count, std::size_t noise_per_end, double lo, double hi,
                                                   std::mt19937_64& rng) {
    if (count < 2 && noise_per_end > 0) throw ConfigError("noise edges need at least two gadgets");
    AugmentationGadget g;
    g.count = count;
    std::unordered_set<std::uint64_t> seen;
    auto add = [&](EdgeKey e, double x) {
        if (!seen.insert(e.code()).second) return;
        g.edges.push_back(e);
        g.base_ranking.emplace_back(e, Rank::from_double(x, e));
    };
    auto above = [&] { return hi + (1.0 - hi) * (0.5 + 0.5 * unit_double(rng)); };
    for (std::size_t k = 0; k < count; ++k) {
        add(EdgeKey{g.a(k), g.b(k)}, above());
        add(EdgeKey{g.c(k), g.d(k)}, above());
        double x = lo + (hi - lo) * unit_double(rng);
        if (x <= lo) x = hi;
        add(EdgeKey{g.b(k), g.c(k)}, x);
    }
    std::uniform_int_distribution<std::size_t> pick(0, count == 0 ? 0 : count - 1);
    for (std::size_t k = 0; k < count; ++k) {
        for (VertexId end : {g.a(k), g.d(k)}) {
            for (std::size_t r = 0; r < noise_per_end; ++r) {
                std::size_t j = pick(rng);
                if (j == k) j = (j + 1) % count;
                const VertexId mid = (rng() >> 63) != 0 ? g.b(j) : g.c(j);
                add(EdgeKey::make(end, mid), above());
            }
        }
    }
    return g;
}

/// Monte Carlo over the level randomness (U-side partition coins, sampling
/// of middle edges, pi_i): counts middle edges with both endpoints matched in
/// M_i = FMM(G'^A u G'^B, pi_i). Bound is ((1 - delta) p/4 - 4p^2)|S_i|, or
/// coefficient * |S_i| when a published coefficient is given.
inline Statistic validate_partition_augmentation(const AugmentationGadget& g, double p, std::size_t trials,
                                                 std::uint64_t seed, double delta = 0.0,
                                                 std::optional<double> coefficient = std::nullopt) {
    std::mt19937_64 rng(seed);
    const std::size_t n = g.vertex_count();
    RunningMoments mom;
    std::vector<std::uint8_t> side_a(n), sampled(g.count);
    std::vector<std::pair<EdgeKey, Rank>> gi;
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t k = 0; k < g.count; ++k) {
            side_a[g.a(k)] = (rng() >> 63) == 0;
            side_a[g.d(k)] = (rng() >> 63) == 0;
            sampled[k] = unit_double(rng) < p;
        }
        gi.clear();
        for (const EdgeKey& e : g.edges) {
            // V' side is a sampled middle edge's endpoint: b on side A, c on side B.
            const VertexId x = e.lo, y = e.hi;
            auto role_v = [&](VertexId w) -> int {
                const std::size_t k = w / 4;
                if (!sampled[k]) return 0;
                if (w % 4 == 1) return 1;
                if (w % 4 == 2) return 2;
                return 0;
            };
            auto role_u = [&](VertexId w) -> int {
                if (w % 4 == 0 || w % 4 == 3) return side_a[w] ? 1 : 2;
                return 0;
            };
            const int vx = role_v(x), vy = role_v(y), ux = role_u(x), uy = role_u(y);
            if ((vx != 0 && vx == uy) || (vy != 0 && vy == ux)) gi.emplace_back(e, Rank{rng(), e});
        }
        const MatchingState m = MatchingState::build_static(n, gi);
        std::size_t both = 0;
        for (std::size_t k = 0; k < g.count; ++k) {
            if (m.mate(g.b(k)) != kNoVertex && m.mate(g.c(k)) != kNoVertex) ++both;
        }
        mom.add(static_cast<double>(both));
    }
    const double coef = coefficient ? *coefficient : (1.0 - delta) * p / 4.0 - 4.0 * p * p;
    return Statistic{mom.mean(), mom.standard_error(), coef * static_cast<double>(g.count), trials};
}

// ---------------------------------------------------------------------------
// Pivot level
// ---------------------------------------------------------------------------

struct PivotResult {
    int level = 0;  // 0 when no level qualifies
    bool mass_ok = false;     // |S_i*| >= 2^{-13L} |M_0|
    bool dominant_ok = false;  // |S_i*| > 2^11 * sum_{i < i*} |S_i|

    bool ok() const { return level > 0 && mass_ok && dominant_ok; }
};

/// Smallest i with |S_i| >= 2^{12i - 13L} |M_0|, with both pivot
/// inequalities evaluated for it.
inline PivotResult find_pivot_level(std::span<const std::uint64_t> sizes) {
    const int levels = static_cast<int>(sizes.size());
    long double total = 0;
    for (auto s : sizes) total += static_cast<long double>(s);
    PivotResult res;
    if (total <= 0) return res;
    for (int i = 1; i <= levels; ++i) {
        const long double need = std::ldexp(total, 12 * i - 13 * levels);
        if (static_cast<long double>(sizes[static_cast<std::size_t>(i - 1)]) >= need) {
            res.level = i;
            break;
        }
    }
    if (res.level == 0) return res;
    const long double pivot = static_cast<long double>(sizes[static_cast<std::size_t>(res.level - 1)]);
    long double below = 0;
    for (int i = 1; i < res.level; ++i) below += static_cast<long double>(sizes[static_cast<std::size_t>(i - 1)]);
    res.mass_ok = pivot >= std::ldexp(total, -13 * levels);
    res.dominant_ok = pivot > std::ldexp(below, 11);
    return res;
}

// ---------------------------------------------------------------------------
// 3-augmentable edges
// ---------------------------------------------------------------------------

/// Number of M_0 edges bc forming the middle of a component a-b-c-d of
/// OPT xor M_0, i.e. ab, cd in OPT with a, d free in M_0.
inline std::size_t count_3_augmentable(std::size_t n, std::span<const EdgeKey> m0, std::span<const EdgeKey> opt) {
    std::vector<VertexId> mate0(n, kNoVertex), mate_opt(n, kNoVertex);
    for (const EdgeKey& e : m0) {
        mate0.at(e.lo) = e.hi;
        mate0.at(e.hi) = e.lo;
    }
    for (const EdgeKey& e : opt) {
        mate_opt.at(e.lo) = e.hi;
        mate_opt.at(e.hi) = e.lo;
    }
    std::size_t count = 0;
    for (const EdgeKey& e : m0) {
        const VertexId a = mate_opt[e.lo];
        const VertexId d = mate_opt[e.hi];
        if (a == kNoVertex || d == kNoVertex || a == e.hi) continue;
        if (mate0[a] == kNoVertex && mate0[d] == kNoVertex) ++count;
    }
    return count;
}

// ---------------------------------------------------------------------------
// Final matcher audit
// ---------------------------------------------------------------------------

/// Exhaustive search for an augmenting path with at most `max_len` edges in
/// the union graph relative to the final matcher's answer.
inline bool has_short_augmenting_path(const FinalMatcher& fm, int max_len) {
    const std::size_t n = fm.vertex_count();
    std::vector<std::uint8_t> on(n, 0);
    struct Frame {
        VertexId cur;
        int left;
        std::size_t next;
        VertexId y, z;
    };
    std::vector<Frame> stack;
    for (VertexId s = 0; s < n; ++s) {
        if (fm.mate(s) != kNoVertex || fm.union_neighbors(s).empty()) continue;
        on[s] = 1;
        stack.assign(1, Frame{s, max_len, 0, kNoVertex, kNoVertex});
        while (!stack.empty()) {
            Frame& f = stack.back();
            const auto& nb = fm.union_neighbors(f.cur);
            if (f.next == nb.size()) {
                if (f.y != kNoVertex) on[f.y] = on[f.z] = 0;
                stack.pop_back();
                continue;
            }
            const VertexId y = nb[f.next++];
            if (on[y] || y == fm.mate(f.cur)) continue;
            if (fm.mate(y) == kNoVertex) return true;
            if (f.left < 3) continue;
            const VertexId z = fm.mate(y);
            if (on[z]) continue;
            on[y] = on[z] = 1;
            const int left = f.left - 2;
            stack.push_back(Frame{z, left, 0, y, z});
        }
        on[s] = 0;
    }
    return false;
}

}  // namespace dynmatch::oracle
