#pragma once

#include <set>
#include <string>
#include <vector>

#include "dynmatch/core_graph.hpp"
#include "dynmatch/oracle/exact_matching.hpp"
#include "dynmatch/pipeline.hpp"
#include "dynmatch/rgmm.hpp"

namespace dynmatch::oracle {

/// Vertex classes of one level, written as explicit sets.
struct LevelSets {
    std::set<EdgeKey> s;  // S_i
    std::set<VertexId> u_a, u_b;
    std::set<VertexId> v_a, v_b;    // endpoints of S_i
    std::set<VertexId> vp_a, vp_b;  // sampled part
    std::vector<EdgeKey> graph;     // G'^A_i u G'^B_i
    MatchingState matching;         // FMM(G_i, pi_i)
};

struct ReferenceState {
    MatchingState base;
    std::vector<LevelSets> levels;  // index 0 unused
    std::vector<EdgeKey> union_edges;
    std::size_t union_mu = 0;
};

/// Interval index of rank value x against thresholds t_0 > t_1 > ... > t_L.
inline int reference_level(std::uint64_t x, const std::vector<std::uint64_t>& t) {
    const int levels = static_cast<int>(t.size()) - 1;
    for (int i = 1; i < levels; ++i) {
        if (x > t[static_cast<std::size_t>(i)] && x <= t[static_cast<std::size_t>(i - 1)]) return i;
    }
    return levels;
}

/// Edges of G with one endpoint in `side_v` and the other in `side_u`.
inline std::vector<EdgeKey> level_graph_edges(const std::vector<EdgeKey>& edges, const std::set<VertexId>& side_v,
                                              const std::set<VertexId>& side_u) {
    std::vector<EdgeKey> out;
    for (const EdgeKey& e : edges) {
        const bool fwd = side_v.count(e.lo) != 0 && side_u.count(e.hi) != 0;
        const bool rev = side_v.count(e.hi) != 0 && side_u.count(e.lo) != 0;
        if (fwd || rev) out.push_back(e);
    }
    return out;
}

/// Runs the static two-stage construction from scratch on the instance's
/// current graph using its stored tapes.
inline ReferenceState static_reference(const Instance& inst, bool compute_union_mu = true) {
    const std::size_t n = inst.vertex_count();
    const int levels = inst.levels();
    const auto t = make_thresholds(inst.config().delta_cap, levels);
    const std::vector<EdgeKey> edges = inst.edge_keys();

    auto ranked = [&](const std::vector<EdgeKey>& es, int level) {
        std::vector<std::pair<EdgeKey, Rank>> out;
        out.reserve(es.size());
        for (const EdgeKey& e : es) out.emplace_back(e, inst.record(e).rank(level));
        return out;
    };

    ReferenceState ref;
    ref.base = MatchingState::build_static(n, ranked(edges, 0));
    const std::vector<EdgeKey> m0 = ref.base.matching();
    ref.levels.resize(static_cast<std::size_t>(levels) + 1);

    std::vector<int> level_of(n, 0);  // level of v's M_0 edge, 0 if unmatched
    for (const EdgeKey& e : m0) {
        const int i = reference_level(inst.record(e).rank(0).value, t);
        ref.levels[static_cast<std::size_t>(i)].s.insert(e);
        level_of[e.lo] = i;
        level_of[e.hi] = i;
    }

    std::set<EdgeKey> all_union(m0.begin(), m0.end());
    for (int i = 1; i <= levels; ++i) {
        LevelSets& ls = ref.levels[static_cast<std::size_t>(i)];
        for (VertexId v = 0; v < n; ++v) {
            const bool in_u = level_of[v] == 0 || level_of[v] < i;
            if (!in_u) continue;
            (inst.partition(v, i) == Side::A ? ls.u_a : ls.u_b).insert(v);
        }
        for (const EdgeKey& e : ls.s) {
            ls.v_a.insert(e.lo);
            ls.v_b.insert(e.hi);
            if (inst.record(e).is_sampled(i)) {
                ls.vp_a.insert(e.lo);
                ls.vp_b.insert(e.hi);
            }
        }
        ls.graph = level_graph_edges(edges, ls.vp_a, ls.u_a);
        const auto part_b = level_graph_edges(edges, ls.vp_b, ls.u_b);
        ls.graph.insert(ls.graph.end(), part_b.begin(), part_b.end());
        std::sort(ls.graph.begin(), ls.graph.end());
        ls.matching = MatchingState::build_static(n, ranked(ls.graph, i));
        for (const EdgeKey& e : ls.matching.matching()) all_union.insert(e);
    }
    ref.union_edges.assign(all_union.begin(), all_union.end());
    if (compute_union_mu) ref.union_mu = max_matching_exact(n, ref.union_edges, {}, n).size;
    return ref;
}

inline VertexRole reference_role(const LevelSets& ls, VertexId v) {
    if (ls.vp_a.count(v) != 0) return VertexRole::va_prime;
    if (ls.vp_b.count(v) != 0) return VertexRole::vb_prime;
    if (ls.u_a.count(v) != 0) return VertexRole::ua;
    if (ls.u_b.count(v) != 0) return VertexRole::ub;
    return VertexRole::absent;
}

/// Lists every difference between the maintained pipeline state and the
/// static reference. Empty means equal.
inline std::vector<std::string> diff_against_reference(const Pipeline& pl, const ReferenceState& ref) {
    std::vector<std::string> out;
    if (!(pl.base() == ref.base)) out.emplace_back("M_0 state differs");
    for (int i = 1; i <= pl.levels(); ++i) {
        const LevelState& got = pl.level(i);
        const LevelSets& want = ref.levels[static_cast<std::size_t>(i)];
        const std::string tag = "level " + std::to_string(i) + ": ";
        if (got.members != want.s) out.push_back(tag + "S_i differs");
        for (VertexId v = 0; v < got.roles.size(); ++v) {
            if (got.roles[v] != reference_role(want, v)) {
                out.push_back(tag + "role of " + std::to_string(v) + " is " + std::string(to_string(got.roles[v])) +
                              ", expected " + std::string(to_string(reference_role(want, v))));
                break;
            }
        }
        if (got.second_stage.edges() != want.graph) out.push_back(tag + "G_i edge set differs");
        if (!(got.second_stage == want.matching)) out.push_back(tag + "M_i state differs");
    }
    if (pl.final_matcher().union_edges() != ref.union_edges) out.emplace_back("union graph differs");
    return out;
}

}  // namespace dynmatch::oracle
