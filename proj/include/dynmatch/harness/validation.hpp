#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dynmatch/harness/replay.hpp"
#include "dynmatch/harness/stream.hpp"
#include "dynmatch/oracle/exact_matching.hpp"
#include "dynmatch/oracle/static_reference.hpp"
#include "dynmatch/oracle/validators.hpp"
#include "dynmatch/pipeline.hpp"
#include "json.hpp"

namespace dynmatch::harness {

/// Optional overrides; every suite falls back to its own defaults.
struct SuiteParams {
    std::optional<std::size_t> n, m, updates, trials;
    std::optional<std::uint32_t> delta;
    std::optional<int> levels;
    std::optional<double> p;
    std::size_t seeds = 10;
    std::uint64_t seed = 1;
};

struct SuiteReport {
    std::string suite;
    bool pass = false;
    nlohmann::json details;
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"equivalence",   "sparsification", "sampling-lemma",
                                                "partition-augmentation", "pivot-level", "level-stability",
                                                "final-approx"};
    return names;
}

// ---------------------------------------------------------------------------
// Base matching checks on random churn
// ---------------------------------------------------------------------------

struct BaseCheckReport {
    std::size_t checkpoints = 0;
    std::size_t state_mismatches = 0;    // maintained M_0 state != static build
    std::size_t maximality_failures = 0;
    std::size_t bound_failures = 0;      // |answer| >= |M_0| >= mu/2 violated
    double mean_delta = 0;
    std::size_t max_delta = 0;
    double seconds = 0;
};

inline std::vector<UpdateEvent> churn_stream(std::size_t n, std::uint32_t delta, std::size_t len, std::uint64_t seed,
                                             double insert_prob = 0.7) {
    StreamSpec s;
    s.generator = "erdos-churn";
    s.n = n;
    s.delta = delta;
    s.length = len;
    s.adversary_seed = seed;
    s.insert_prob = insert_prob;
    return generate_stream(s);
}

inline bool base_is_maximal(const Pipeline& pl) {
    for (const auto& [code, rec] : pl.instance().edges()) {
        if (pl.base().mate(rec.key.lo) == kNoVertex && pl.base().mate(rec.key.hi) == kNoVertex) return false;
    }
    return true;
}

/// Replays churn streams and compares the maintained M_0 against a static
/// greedy build after every update.
inline BaseCheckReport run_base_checks(std::size_t n, std::uint32_t delta, std::size_t updates, std::size_t seeds,
                                       int levels = 2, std::uint64_t seed0 = 1) {
    BaseCheckReport out;
    const auto start = std::chrono::steady_clock::now();
    double delta_total = 0;
    for (std::uint64_t s = seed0; s < seed0 + seeds; ++s) {
        const auto events = churn_stream(n, delta, updates, 0x5eed0000 + s);
        ReplayOptions opt;
        opt.n = n;
        opt.delta = delta;
        opt.levels = levels;
        opt.algo_seed = s;
        opt.oracle_every = 0;
        oracle::IncrementalMaxMatching mu(n);
        replay(events, opt, {}, [&](const Pipeline& pl, const UpdateEvent& ev, const UpdateReport& rep) {
            const EdgeKey e = EdgeKey::make(ev.u, ev.v);
            if (ev.op == Op::insert) mu.insert(e);
            else mu.erase(e);
            ++out.checkpoints;
            std::vector<std::pair<EdgeKey, Rank>> ranked;
            ranked.reserve(pl.instance().edge_count());
            for (const auto& [code, rec] : pl.instance().edges()) ranked.emplace_back(rec.key, rec.rank(0));
            if (!(pl.base() == MatchingState::build_static(n, ranked))) ++out.state_mismatches;
            if (!base_is_maximal(pl)) ++out.maximality_failures;
            const std::size_t m0 = pl.base().size();
            if (pl.answer_size() < m0 || 2 * m0 < mu.size()) ++out.bound_failures;
            delta_total += static_cast<double>(rep.m0_delta());
            out.max_delta = std::max(out.max_delta, rep.m0_delta());
        });
    }
    out.mean_delta = out.checkpoints ? delta_total / static_cast<double>(out.checkpoints) : 0.0;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// ---------------------------------------------------------------------------
// Full pipeline checks against the static reference
// ---------------------------------------------------------------------------

struct PipelineCheckReport {
    std::size_t checkpoints = 0;
    std::size_t equivalence_failures = 0;
    std::size_t stability_checks = 0;      // (update, level k > j) pairs examined
    std::size_t stability_violations = 0;
    std::size_t bound_failures = 0;        // maximality, |answer| >= |M_0| >= mu/2
    std::size_t final_path_failures = 0;   // short augmenting path present
    std::size_t final_ratio_failures = 0;  // |answer| < k/(k+1) mu(union)
    std::string first_error;
    double seconds = 0;
};

inline PipelineCheckReport run_pipeline_checks(std::size_t n, std::uint32_t delta, std::size_t updates,
                                               std::size_t seeds, const std::vector<int>& level_set,
                                               std::uint64_t seed0 = 1) {
    PipelineCheckReport out;
    const auto start = std::chrono::steady_clock::now();
    auto note = [&](const std::string& msg) {
        if (out.first_error.empty()) out.first_error = msg;
    };
    for (int levels : level_set) {
        for (std::uint64_t s = seed0; s < seed0 + seeds; ++s) {
            const auto events = churn_stream(n, delta, updates, 0xc0ffee00 + s * 31 + static_cast<std::uint64_t>(levels));
            InstanceConfig cfg;
            cfg.n = n;
            cfg.delta_cap = delta;
            cfg.levels = levels;
            cfg.algo_seed = s;
            Pipeline pl(cfg);
            const int k = cfg.final_depth();
            oracle::IncrementalMaxMatching mu(n);
            std::vector<MatchingState> snap(static_cast<std::size_t>(levels) + 1);
            for (int i = 1; i <= levels; ++i) snap[static_cast<std::size_t>(i)] = pl.level(i).second_stage;
            for (const auto& ev : events) {
                const std::string where = "L=" + std::to_string(levels) + " seed=" + std::to_string(s) +
                                          " seq=" + std::to_string(ev.seq);
                const EdgeKey f = EdgeKey::make(ev.u, ev.v);
                int j = 0;
                if (ev.op == Op::erase && pl.base().contains(f) && pl.base().is_matched(f)) {
                    j = pl.instance().level_of_rank(pl.base().rank(f));
                }
                UpdateReport rep;
                apply_event(pl, ev, rep);
                if (ev.op == Op::insert) {
                    mu.insert(f);
                    if (pl.base().is_matched(f)) j = pl.instance().level_of_rank(pl.base().rank(f));
                } else {
                    mu.erase(f);
                }
                ++out.checkpoints;

                const auto ref = oracle::static_reference(pl.instance(), true);
                const auto diffs = oracle::diff_against_reference(pl, ref);
                if (!diffs.empty()) {
                    ++out.equivalence_failures;
                    note(where + ": " + diffs.front());
                }
                if (j > 0) {
                    for (int i = j + 1; i <= levels; ++i) {
                        ++out.stability_checks;
                        if (!(pl.level(i).second_stage == snap[static_cast<std::size_t>(i)])) {
                            ++out.stability_violations;
                            note(where + ": level " + std::to_string(i) + " changed above S_" + std::to_string(j));
                        }
                    }
                }
                const std::size_t m0 = pl.base().size();
                if (!base_is_maximal(pl) || pl.answer_size() < m0 || 2 * m0 < mu.size()) {
                    ++out.bound_failures;
                    note(where + ": maximality or |answer| >= |M_0| >= mu/2 violated");
                }
                if (oracle::has_short_augmenting_path(pl.final_matcher(), 2 * k - 1)) {
                    ++out.final_path_failures;
                    note(where + ": augmenting path of length <= 2k-1 in the union");
                }
                if (static_cast<double>(pl.answer_size()) * (k + 1) < static_cast<double>(ref.union_mu) * k) {
                    ++out.final_ratio_failures;
                    note(where + ": answer below k/(k+1) mu(union)");
                }
                // Pre-update state for the next level-stability comparison.
                for (int i = 1; i <= levels; ++i) snap[static_cast<std::size_t>(i)] = pl.level(i).second_stage;
            }
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// ---------------------------------------------------------------------------
// Statistical suites
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const oracle::Statistic& st) {
    return nlohmann::json{{"mean", st.mean}, {"stderr", st.stderr_}, {"bound", st.bound}, {"trials", st.trials},
                          {"pass", st.pass()}};
}

inline std::vector<double> dyadic_thresholds(int from, int to) {
    std::vector<double> out;
    for (int k = from; k <= to; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

inline SuiteReport sparsification_suite(const SuiteParams& sp) {
    const auto rep = oracle::audit_sparsification(sp.n.value_or(2000), sp.m.value_or(20000), sp.trials.value_or(30),
                                                  dyadic_thresholds(2, 8), sp.seed);
    SuiteReport out{"sparsification", rep.pass(), {}};
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < rep.thresholds.size(); ++k) {
        rows.push_back({{"p", rep.thresholds[k]}, {"max_degree", rep.max_degree[k]}, {"bound", rep.bound(k)}});
    }
    out.details = {{"n", rep.n}, {"m", rep.m}, {"trials", rep.trials}, {"seed", rep.seed},
                   {"fitted_c", rep.fitted_c}, {"gate_c", rep.gate_c}, {"thresholds", rows}};
    return out;
}

struct SamplingLemmaResult {
    std::vector<oracle::Statistic> stats;
    std::vector<std::string> labels;
    bool pass() const {
        for (const auto& s : stats) {
            if (!s.pass()) return false;
        }
        return !stats.empty();
    }
};

/// K_{8,8} at p = 0.25 plus random bipartite graphs with at most 64 vertices
/// alternating p between 0.1 and 0.3.
inline SamplingLemmaResult run_sampling_lemma(std::size_t instances, std::size_t trials, std::uint64_t seed) {
    SamplingLemmaResult out;
    std::mt19937_64 rng(seed);
    const auto k88 = oracle::complete_bipartite(8, rng);
    out.stats.push_back(oracle::validate_vertex_sampling(k88, 0.25, trials, seed * 7 + 1));
    out.labels.push_back("K_{8,8} p=0.25");
    for (std::size_t i = 0; i < instances; ++i) {
        const std::size_t nv = 8 + rng() % 25, nu = 8 + rng() % 25;
        const double q = 0.05 + 0.3 * oracle::unit_double(rng);
        const double p = i % 2 == 0 ? 0.1 : 0.3;
        const auto g = oracle::random_bipartite(nv, nu, q, rng);
        out.stats.push_back(oracle::validate_vertex_sampling(g, p, trials, seed * 7 + 2 + i));
        out.labels.push_back("random " + std::to_string(nv) + "x" + std::to_string(nu) + " p=" +
                             (i % 2 == 0 ? std::string("0.1") : std::string("0.3")));
    }
    return out;
}

inline SuiteReport sampling_lemma_suite(const SuiteParams& sp) {
    const auto res = run_sampling_lemma(20, sp.trials.value_or(10000), sp.seed);
    SuiteReport out{"sampling-lemma", res.pass(), {}};
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < res.stats.size(); ++i) {
        auto j = to_json(res.stats[i]);
        j["instance"] = res.labels[i];
        rows.push_back(j);
    }
    out.details = {{"instances", rows}};
    return out;
}

inline constexpr double kAugmentationCoefficient = 0.003825;

inline oracle::Statistic run_partition_augmentation(std::size_t count, double p, std::size_t trials,
                                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto g = oracle::make_augmentation_gadget(count, 2, 0.05, 0.25, rng);
    return oracle::validate_partition_augmentation(g, p, trials, seed + 1, 0.0, kAugmentationCoefficient);
}

inline SuiteReport partition_augmentation_suite(const SuiteParams& sp) {
    const std::size_t count = sp.n.value_or(5000);
    const auto st = run_partition_augmentation(count, sp.p.value_or(0.03), sp.trials.value_or(200), sp.seed);
    SuiteReport out{"partition-augmentation", st.pass(), to_json(st)};
    out.details["s_i"] = count;
    out.details["coefficient"] = kAugmentationCoefficient;
    return out;
}

struct PivotSweep {
    std::size_t vectors = 0;
    std::size_t failures = 0;
};

/// Random size vectors mixing flat and wildly skewed scales, including zeros.
inline PivotSweep run_pivot_sweep(int levels, std::size_t vectors, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PivotSweep out;
    std::vector<std::uint64_t> sizes(static_cast<std::size_t>(levels));
    for (std::size_t t = 0; t < vectors; ++t) {
        std::uint64_t total = 0;
        do {
            total = 0;
            for (auto& s : sizes) {
                switch (rng() % 4) {
                    case 0: s = 0; break;
                    case 1: s = rng() % 1000; break;
                    case 2: s = static_cast<std::uint64_t>(std::ldexp(1.0, static_cast<int>(rng() % 50))); break;
                    default: s = rng() % (std::uint64_t{1} << 40); break;
                }
                total += s;
            }
        } while (total == 0);
        ++out.vectors;
        if (!oracle::find_pivot_level(sizes).ok()) ++out.failures;
    }
    return out;
}

inline SuiteReport pivot_level_suite(const SuiteParams& sp) {
    SuiteReport out{"pivot-level", true, nlohmann::json::array()};
    std::vector<int> levels = sp.levels ? std::vector<int>{*sp.levels} : std::vector<int>{2, 3, 4};
    for (int L : levels) {
        const auto r = run_pivot_sweep(L, sp.trials.value_or(10000), sp.seed + static_cast<std::uint64_t>(L));
        out.details.push_back({{"levels", L}, {"vectors", r.vectors}, {"failures", r.failures}});
        out.pass = out.pass && r.failures == 0;
    }
    return out;
}

inline nlohmann::json to_json(const PipelineCheckReport& r) {
    return nlohmann::json{{"checkpoints", r.checkpoints},
                          {"equivalence_failures", r.equivalence_failures},
                          {"stability_checks", r.stability_checks},
                          {"stability_violations", r.stability_violations},
                          {"bound_failures", r.bound_failures},
                          {"final_path_failures", r.final_path_failures},
                          {"final_ratio_failures", r.final_ratio_failures},
                          {"first_error", r.first_error},
                          {"seconds", r.seconds}};
}

inline PipelineCheckReport pipeline_checks_for(const SuiteParams& sp) {
    const std::vector<int> levels = sp.levels ? std::vector<int>{*sp.levels} : std::vector<int>{2, 3};
    return run_pipeline_checks(sp.n.value_or(64), sp.delta.value_or(16), sp.updates.value_or(500), sp.seeds, levels,
                               sp.seed);
}


// ---------------------------------------------------------------------------
// Improvement over M_0 on the clique-plus-perfect-matching family
// ---------------------------------------------------------------------------

struct CliqueImprovement {
    std::size_t n = 0;
    std::size_t mu = 0;  // n/2: the pendant edges form a perfect matching
    std::vector<double> m0_ratio, answer_ratio;
    oracle::Statistic m0, gain;  // gain: paired (|answer| - |M_0|) / mu
    double seconds = 0;

    bool m0_in_band(double lo = 0.50, double hi = 0.55) const { return m0.mean >= lo && m0.mean <= hi; }
    bool gain_significant(double sigmas = 3.0) const {
        return gain.mean > 0 && gain.mean - sigmas * gain.stderr_ >= 0;
    }
};

/// One adversarial insertion order of the clique-pm instance, replayed under
/// `seeds` independent algorithm seeds.
inline CliqueImprovement run_clique_improvement(std::size_t n, std::size_t seeds, int levels = 2,
                                                double sample_p = 0.03, std::uint64_t adversary_seed = 2024,
                                                std::uint64_t seed0 = 1) {
    CliqueImprovement out;
    out.n = n;
    out.mu = n / 2;
    const auto start = std::chrono::steady_clock::now();
    StreamSpec s;
    s.generator = "clique-pm";
    s.n = n;
    s.delta = static_cast<std::uint32_t>(n / 2);
    s.length = 0;
    s.adversary_seed = adversary_seed;
    const auto events = generate_stream(s);
    oracle::RunningMoments m0, gain;
    for (std::uint64_t seed = seed0; seed < seed0 + seeds; ++seed) {
        InstanceConfig cfg;
        cfg.n = n;
        cfg.delta_cap = s.delta;
        cfg.levels = levels;
        cfg.sample_p = sample_p;
        cfg.algo_seed = seed;
        Pipeline pl(cfg);
        UpdateReport rep;
        for (const auto& ev : events) apply_event(pl, ev, rep);
        const double mu = static_cast<double>(out.mu);
        const double a = static_cast<double>(pl.base().size()) / mu;
        const double b = static_cast<double>(pl.answer_size()) / mu;
        out.m0_ratio.push_back(a);
        out.answer_ratio.push_back(b);
        m0.add(a);
        gain.add(b - a);
    }
    out.m0 = oracle::Statistic{m0.mean(), m0.standard_error(), 0.5, m0.count()};
    out.gain = oracle::Statistic{gain.mean(), gain.standard_error(), 0.0, gain.count()};
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Runs one named suite; unknown names throw ConfigError.
inline SuiteReport run_validation(const std::string& suite, const SuiteParams& sp) {
    if (suite == "sparsification") return sparsification_suite(sp);
    if (suite == "sampling-lemma") return sampling_lemma_suite(sp);
    if (suite == "partition-augmentation") return partition_augmentation_suite(sp);
    if (suite == "pivot-level") return pivot_level_suite(sp);
    if (suite == "equivalence" || suite == "level-stability" || suite == "final-approx") {
        SuiteParams local = sp;
        if (suite == "equivalence" && !local.n) local.n = 32;
        if (suite == "equivalence" && !local.updates) local.updates = 200;
        const auto r = pipeline_checks_for(local);
        bool pass = r.checkpoints > 0;
        if (suite == "equivalence") pass = pass && r.equivalence_failures == 0 && r.bound_failures == 0;
        if (suite == "level-stability") pass = pass && r.stability_violations == 0 && r.stability_checks > 0;
        if (suite == "final-approx") pass = pass && r.final_path_failures == 0 && r.final_ratio_failures == 0;
        return SuiteReport{suite, pass, to_json(r)};
    }
    throw ConfigError("unknown suite: " + suite);
}

}  // namespace dynmatch::harness
