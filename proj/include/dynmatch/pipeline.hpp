#pragma once

#include <algorithm>
#include <chrono>
#include <set>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dynmatch/core_graph.hpp"
#include "dynmatch/final_match.hpp"
#include "dynmatch/rgmm.hpp"

namespace dynmatch {

/// Membership of a vertex in the second-stage graph of one level.
enum class VertexRole : std::uint8_t { absent, va_prime, vb_prime, ua, ub };

inline std::string_view to_string(VertexRole role) {
    switch (role) {
        case VertexRole::absent: return "absent";
        case VertexRole::va_prime: return "VA'";
        case VertexRole::vb_prime: return "VB'";
        case VertexRole::ua: return "UA";
        case VertexRole::ub: return "UB";
    }
    return "?";
}

/// True iff an edge between vertices with these roles belongs to G_i:
/// V'^A x U^A or V'^B x U^B, in either orientation.
constexpr bool second_stage_edge(VertexRole a, VertexRole b) {
    return (a == VertexRole::va_prime && b == VertexRole::ua) || (a == VertexRole::vb_prime && b == VertexRole::ub) ||
           (b == VertexRole::va_prime && a == VertexRole::ua) || (b == VertexRole::vb_prime && a == VertexRole::ub);
}

struct LevelState {
    int level = 0;
    std::set<EdgeKey> members;  // S_i
    MatchingState second_stage;  // G_i with M_i = FMM(G_i, pi_i)
    std::vector<VertexRole> roles;
};

struct RoleDelta {
    VertexId vertex = 0;
    int level = 0;
    VertexRole before = VertexRole::absent;
    VertexRole after = VertexRole::absent;
};

struct UpdateReport {
    std::vector<DeltaList> deltas;  // index 0 is M_0, index i is M_i
    DeltaList answer;
    int trigger_level = 0;          // level of the lowest-rank M_0 change, 0 if M_0 unchanged
    std::size_t changed_vertices = 0;
    std::size_t role_changes = 0;
    std::size_t candidate_total = 0;  // sum of |L_v|
    std::size_t queue_pops = 0;
    std::uint64_t nanoseconds = 0;

    std::size_t m0_delta() const { return deltas.empty() ? 0 : deltas[0].size(); }
};

/// Maintains the two-stage matching state: the base greedy matching M_0, its
/// rank partition S_1..S_L, vertex roles, second-stage graphs G_i with their
/// greedy matchings M_i, and the final matching over M_0 u ... u M_L.
class Pipeline {
public:
    explicit Pipeline(InstanceConfig config)
        : instance_(std::move(config)),
          base_(instance_.vertex_count()),
          final_(instance_.vertex_count(), instance_.config().final_depth()) {
        const std::size_t n = instance_.vertex_count();
        levels_.resize(static_cast<std::size_t>(instance_.levels()) + 1);
        for (int i = 1; i <= instance_.levels(); ++i) {
            LevelState& ls = levels_[static_cast<std::size_t>(i)];
            ls.level = i;
            ls.second_stage = MatchingState(n);
            ls.roles.resize(n);
            for (VertexId v = 0; v < n; ++v) ls.roles[v] = derive_role(v, i);
        }
    }

    UpdateReport insert(VertexId u, VertexId v) {
        const auto start = std::chrono::steady_clock::now();
        const EdgeRecord& rec = instance_.admit_edge(u, v);
        return finish(after_insert(rec), start);
    }

    /// Insertion with a prescribed random tape for the edge.
    UpdateReport insert_record(EdgeRecord rec) {
        const auto start = std::chrono::steady_clock::now();
        const EdgeRecord& stored = instance_.admit_record(std::move(rec));
        return finish(after_insert(stored), start);
    }

    UpdateReport erase(VertexId u, VertexId v) {
        const auto start = std::chrono::steady_clock::now();
        const EdgeKey key = EdgeKey::make(u, v);
        if (!instance_.contains(key)) throw EdgeNotFoundError("edge " + to_string(key) + " is not present");
        UpdateReport report = blank_report();
        // An edge outside M_0 may sit in second-stage graphs; drop it there first.
        for (int i = 1; i <= levels(); ++i) {
            MatchingState& g = level_mut(i).second_stage;
            if (g.contains(key)) append(report.deltas[static_cast<std::size_t>(i)], g.apply_delete(key));
        }
        last_retired_rank_ = instance_.retire_edge(u, v).rank(0);
        DeltaList d0 = base_.apply_delete(key);
        propagate(d0, report);
        return finish(std::move(report), start);
    }

    /// Step 2: recomputes roles of vertices whose M_0 edge changed and returns
    /// the per-level role transitions.
    std::vector<RoleDelta> update_roles(std::span<const VertexId> changed) {
        std::vector<RoleDelta> out;
        for (VertexId v : changed) {
            for (int i = 1; i <= levels(); ++i) {
                VertexRole& stored = level_mut(i).roles[v];
                const VertexRole now = derive_role(v, i);
                if (now == stored) continue;
                out.push_back(RoleDelta{v, i, stored, now});
                stored = now;
            }
        }
        return out;
    }

    /// Step 3: removes second-stage edges of vertices that left a role, then
    /// inserts edges for vertices that joined one. Candidates come from the
    /// base eliminator index restricted to eliminator rank >= alpha.
    std::vector<DeltaList> rebuild_memberships(std::span<const RoleDelta> role_deltas, int trigger_level,
                                               const Rank& alpha, std::size_t* candidate_total = nullptr) {
        std::vector<DeltaList> out(static_cast<std::size_t>(levels()) + 1);
        std::vector<RoleDelta> ordered(role_deltas.begin(), role_deltas.end());
        std::stable_sort(ordered.begin(), ordered.end(),
                         [](const RoleDelta& a, const RoleDelta& b) { return a.level < b.level; });
        for (const RoleDelta& rd : ordered) {
            if (rd.level > trigger_level) throw ConsistencyError("role change above trigger level");
        }

        for (const RoleDelta& rd : ordered) {
            if (rd.before == VertexRole::absent) continue;
            MatchingState& g = level_mut(rd.level).second_stage;
            for (VertexId u : g.neighbors(rd.vertex)) {
                append(out[static_cast<std::size_t>(rd.level)], g.apply_delete(EdgeKey::make(rd.vertex, u)));
            }
        }
        for (const RoleDelta& rd : ordered) {
            if (rd.after == VertexRole::absent) continue;
            LevelState& ls = level_mut(rd.level);
            // The stored role may have moved again if the vertex appears twice.
            if (ls.roles[rd.vertex] != rd.after) continue;
            const auto candidates = base_.neighbors_above(rd.vertex, alpha);
            if (candidate_total != nullptr) *candidate_total += candidates.size();
            for (const auto& [e, elim] : candidates) {
                const VertexId u = e.other(rd.vertex);
                if (!second_stage_edge(rd.after, ls.roles[u]) || ls.second_stage.contains(e)) continue;
                const Rank& r = instance_.record(e).rank(rd.level);
                append(out[static_cast<std::size_t>(rd.level)], ls.second_stage.apply_insert(e, r));
            }
        }
        return out;
    }

    /// Role of v at level i computed from scratch from its M_0 edge.
    VertexRole derive_role(VertexId v, int level) const {
        const auto e = base_.matched_edge(v);
        const int lv = e ? instance_.level_of_rank(base_.matched_rank(v)) : 0;
        if (lv < level) return instance_.partition(v, level) == Side::A ? VertexRole::ua : VertexRole::ub;
        if (lv > level) return VertexRole::absent;
        if (!instance_.record(*e).is_sampled(level)) return VertexRole::absent;
        return v == e->lo ? VertexRole::va_prime : VertexRole::vb_prime;
    }

    VertexRole role(VertexId v, int level) const { return levels_.at(static_cast<std::size_t>(level)).roles.at(v); }

    std::vector<EdgeKey> current_answer() const { return final_.matching(); }
    std::size_t answer_size() const { return final_.size(); }

    int levels() const { return instance_.levels(); }
    const Instance& instance() const { return instance_; }
    const MatchingState& base() const { return base_; }
    const LevelState& level(int i) const { return levels_.at(static_cast<std::size_t>(i)); }
    const FinalMatcher& final_matcher() const { return final_; }

private:
    LevelState& level_mut(int i) { return levels_[static_cast<std::size_t>(i)]; }

    UpdateReport blank_report() const {
        UpdateReport report;
        report.deltas.resize(static_cast<std::size_t>(levels()) + 1);
        return report;
    }

    static void append(DeltaList& into, const DeltaList& from) {
        into.left.insert(into.left.end(), from.left.begin(), from.left.end());
        into.joined.insert(into.joined.end(), from.joined.begin(), from.joined.end());
        into.pops += from.pops;
    }

    UpdateReport after_insert(const EdgeRecord& rec) {
        UpdateReport report = blank_report();
        const EdgeKey key = rec.key;
        DeltaList d0 = base_.apply_insert(key, rec.rank(0));
        if (d0.empty()) {
            // M_0 unchanged: the new edge may still belong to some G_i.
            for (int i = 1; i <= levels(); ++i) {
                LevelState& ls = level_mut(i);
                if (second_stage_edge(ls.roles[key.lo], ls.roles[key.hi])) {
                    append(report.deltas[static_cast<std::size_t>(i)], ls.second_stage.apply_insert(key, rec.rank(i)));
                }
            }
            report.deltas[0].pops += d0.pops;
        } else {
            propagate(d0, report);
        }
        return report;
    }

    // Steps 1 (partition bookkeeping), 2 and 3 for a non-empty M_0 delta.
    void propagate(const DeltaList& d0, UpdateReport& report) {
        append(report.deltas[0], d0);
        if (d0.empty()) return;
        std::vector<VertexId> changed;
        Rank lowest = Rank::sentinel();
        auto note = [&](const EdgeKey& e) {
            changed.push_back(e.lo);
            changed.push_back(e.hi);
        };
        for (const EdgeKey& e : d0.left) {
            // Left edges may already be gone from the base graph (deleted edge).
            const Rank r = left_rank(e);
            lowest = std::min(lowest, r);
            level_mut(instance_.level_of_rank(r)).members.erase(e);
            note(e);
        }
        for (const EdgeKey& e : d0.joined) {
            const Rank& r = base_.rank(e);
            lowest = std::min(lowest, r);
            level_mut(instance_.level_of_rank(r)).members.insert(e);
            note(e);
        }
        std::sort(changed.begin(), changed.end());
        changed.erase(std::unique(changed.begin(), changed.end()), changed.end());

        const int j = instance_.level_of_rank(lowest);
        report.trigger_level = j;
        report.changed_vertices = changed.size();
        const auto role_deltas = update_roles(changed);
        report.role_changes = role_deltas.size();
        auto level_deltas = rebuild_memberships(role_deltas, j, instance_.level_floor(j), &report.candidate_total);
        for (int i = 1; i <= levels(); ++i) {
            append(report.deltas[static_cast<std::size_t>(i)], level_deltas[static_cast<std::size_t>(i)]);
        }
    }

    Rank left_rank(const EdgeKey& e) const {
        if (base_.contains(e)) return base_.rank(e);
        return last_retired_rank_;
    }

    UpdateReport finish(UpdateReport report, std::chrono::steady_clock::time_point start) {
        // Step 4: forward the net change of every matching to the union graph.
        for (DeltaList& d : report.deltas) {
            net(d);
            report.queue_pops += d.pops;
            for (const EdgeKey& e : d.left) merge(report.answer, final_.union_apply(e, false));
            for (const EdgeKey& e : d.joined) merge(report.answer, final_.union_apply(e, true));
        }
        // Bounded repair alone can fall below |M_0|; the difference M_0 vs
        // answer then contains a path augmenting the answer.
        while (final_.size() < base_.size()) merge(report.answer, final_.augment_path(m0_augmenting_path()));
        net(report.answer);
        report.nanoseconds = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
        return report;
    }

    // Walks M_0 / answer alternating paths from answer-free vertices until one
    // ends on an M_0 edge.
    std::vector<VertexId> m0_augmenting_path() const {
        std::vector<VertexId> path;
        for (VertexId x = 0; x < instance_.vertex_count(); ++x) {
            if (final_.mate(x) != kNoVertex || base_.mate(x) == kNoVertex) continue;
            path.assign({x, base_.mate(x)});
            while (true) {
                const VertexId a = final_.mate(path.back());
                if (a == kNoVertex) return path;
                const VertexId b = base_.mate(a);
                if (b == kNoVertex) break;
                path.push_back(a);
                path.push_back(b);
            }
        }
        throw ConsistencyError("answer smaller than M_0 but no alternating path found");
    }

    static void merge(DeltaList& into, const DeltaList& from) { append(into, from); }

    // An edge can join and leave the same matching within one update; keep
    // only the net transitions, in first-seen order.
    static void net(DeltaList& d) {
        if (d.left.empty() || d.joined.empty()) return;
        std::unordered_map<std::uint64_t, int> count;
        std::vector<EdgeKey> order;
        for (const EdgeKey& e : d.left) {
            if (count[e.code()]-- == 0) order.push_back(e);
        }
        for (const EdgeKey& e : d.joined) {
            auto [it, fresh] = count.try_emplace(e.code(), 0);
            if (fresh) order.push_back(e);
            ++it->second;
        }
        d.left.clear();
        d.joined.clear();
        for (const EdgeKey& e : order) {
            const int c = count[e.code()];
            if (c < 0) d.left.push_back(e);
            if (c > 0) d.joined.push_back(e);
        }
    }

    Instance instance_;
    MatchingState base_;
    std::vector<LevelState> levels_;  // index 0 unused
    FinalMatcher final_;
    Rank last_retired_rank_{};
};

}  // namespace dynmatch
