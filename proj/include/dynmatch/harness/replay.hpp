#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "dynmatch/harness/stream.hpp"
#include "dynmatch/oracle/exact_matching.hpp"
#include "dynmatch/pipeline.hpp"
#include "json.hpp"

namespace dynmatch::harness {

struct ReplayOptions {
    std::size_t n = 0;  // 0: infer from the stream
    std::uint32_t delta = 0;
    int levels = 2;
    double sample_p = 0.03;
    double final_eps = 0.0;
    std::uint64_t algo_seed = 0;
    std::size_t oracle_every = 100;  // 0 disables the oracle
    std::size_t oracle_limit = oracle::kDefaultOracleLimit;
};

struct MetricsRecord {
    std::size_t seq = 0;
    std::size_t m0 = 0;
    std::size_t answer = 0;
    std::optional<std::size_t> mu;
    std::size_t m0_delta = 0;
    std::vector<std::size_t> level_deltas;  // M_1..M_L
    std::size_t lv_total = 0;
    std::uint64_t ns = 0;

    std::optional<double> ratio() const {
        if (!mu) return std::nullopt;
        return *mu == 0 ? 1.0 : static_cast<double>(answer) / static_cast<double>(*mu);
    }
    std::optional<double> m0_ratio() const {
        if (!mu) return std::nullopt;
        return *mu == 0 ? 1.0 : static_cast<double>(m0) / static_cast<double>(*mu);
    }
};

struct ReplaySummary {
    std::size_t updates = 0;
    std::size_t n = 0;
    double mean_ns = 0, p50_ns = 0, p99_ns = 0, max_ns = 0;
    double mean_adjustment = 0;
    std::size_t max_adjustment = 0;
    std::size_t oracle_checks = 0;
    double min_ratio = 0, final_ratio = 0, mean_ratio = 0;
    double mean_m0_ratio = 0;  // baseline: |M_0| / mu at the same checkpoints
    std::size_t final_m0 = 0, final_answer = 0;
};

inline nlohmann::json to_json(const MetricsRecord& r) {
    nlohmann::json j{{"seq", r.seq},           {"m0", r.m0},   {"answer", r.answer},
                     {"m0_delta", r.m0_delta}, {"level_deltas", r.level_deltas},
                     {"lv_total", r.lv_total}, {"ns", r.ns}};
    j["mu"] = r.mu ? nlohmann::json(*r.mu) : nlohmann::json(nullptr);
    j["ratio"] = r.ratio() ? nlohmann::json(*r.ratio()) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const ReplaySummary& s) {
    return nlohmann::json{{"updates", s.updates},
                          {"n", s.n},
                          {"time_ns", {{"mean", s.mean_ns}, {"p50", s.p50_ns}, {"p99", s.p99_ns}, {"max", s.max_ns}}},
                          {"adjustment", {{"mean", s.mean_adjustment}, {"max", s.max_adjustment}}},
                          {"oracle_checks", s.oracle_checks},
                          {"min_ratio", s.min_ratio},
                          {"final_ratio", s.final_ratio},
                          {"mean_ratio", s.mean_ratio},
                          {"mean_m0_ratio", s.mean_m0_ratio},
                          {"final_m0", s.final_m0},
                          {"final_answer", s.final_answer}};
}

inline double percentile(std::vector<std::uint64_t> xs, double q) {
    if (xs.empty()) return 0.0;
    const std::size_t k = std::min(xs.size() - 1, static_cast<std::size_t>(q * static_cast<double>(xs.size())));
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k), xs.end());
    return static_cast<double>(xs[k]);
}

inline void apply_event(Pipeline& pl, const UpdateEvent& ev, UpdateReport& rep) {
    try {
        rep = ev.op == Op::insert ? pl.insert(ev.u, ev.v) : pl.erase(ev.u, ev.v);
    } catch (const Error& ex) {
        throw StreamError("replay aborted at seq " + std::to_string(ev.seq) + ": " + ex.what());
    }
}

/// Feeds the stream through a fresh pipeline. `sink` receives one record per
/// event; the optional `observer` sees the pipeline after every update.
inline ReplaySummary replay(const std::vector<UpdateEvent>& events, const ReplayOptions& opt,
                            const std::function<void(const MetricsRecord&)>& sink = {},
                            const std::function<void(const Pipeline&, const UpdateEvent&, const UpdateReport&)>&
                                observer = {}) {
    ReplaySummary sum;
    const std::size_t n = opt.n != 0 ? opt.n : std::max<std::size_t>(infer_vertex_count(events), 2);
    sum.n = n;
    if (events.empty()) return sum;
    InstanceConfig cfg;
    cfg.n = n;
    cfg.delta_cap = opt.delta;
    cfg.levels = opt.levels;
    cfg.sample_p = opt.sample_p;
    cfg.final_eps = opt.final_eps;
    cfg.algo_seed = opt.algo_seed;
    Pipeline pl(cfg);

    const bool use_oracle = opt.oracle_every > 0 && n <= opt.oracle_limit;
    std::optional<oracle::IncrementalMaxMatching> mu;
    if (use_oracle) mu.emplace(n, opt.oracle_limit);

    std::vector<std::uint64_t> times;
    times.reserve(events.size());
    double adj_total = 0, ratio_total = 0, m0_ratio_total = 0;
    sum.min_ratio = 1.0;
    bool any_ratio = false;
    UpdateReport rep;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const UpdateEvent& ev = events[k];
        apply_event(pl, ev, rep);
        MetricsRecord rec;
        rec.seq = ev.seq;
        rec.m0 = pl.base().size();
        rec.answer = pl.answer_size();
        rec.m0_delta = rep.m0_delta();
        for (int i = 1; i <= pl.levels(); ++i) rec.level_deltas.push_back(rep.deltas[static_cast<std::size_t>(i)].size());
        rec.lv_total = rep.candidate_total;
        rec.ns = rep.nanoseconds;
        if (mu) {
            const EdgeKey e = EdgeKey::make(ev.u, ev.v);
            if (ev.op == Op::insert) mu->insert(e);
            else mu->erase(e);
            if ((k + 1) % opt.oracle_every == 0 || k + 1 == events.size()) {
                rec.mu = mu->size();
                const double r = *rec.ratio();
                ++sum.oracle_checks;
                ratio_total += r;
                m0_ratio_total += *rec.m0_ratio();
                sum.min_ratio = std::min(sum.min_ratio, r);
                sum.final_ratio = r;
                any_ratio = true;
            }
        }
        times.push_back(rec.ns);
        adj_total += static_cast<double>(rec.m0_delta);
        sum.max_adjustment = std::max(sum.max_adjustment, rec.m0_delta);
        if (sink) sink(rec);
        if (observer) observer(pl, ev, rep);
    }
    sum.updates = events.size();
    sum.mean_adjustment = adj_total / static_cast<double>(events.size());
    double total_ns = 0;
    for (auto t : times) total_ns += static_cast<double>(t);
    sum.mean_ns = total_ns / static_cast<double>(times.size());
    sum.max_ns = static_cast<double>(*std::max_element(times.begin(), times.end()));
    sum.p50_ns = percentile(times, 0.50);
    sum.p99_ns = percentile(times, 0.99);
    if (any_ratio) {
        sum.mean_ratio = ratio_total / static_cast<double>(sum.oracle_checks);
        sum.mean_m0_ratio = m0_ratio_total / static_cast<double>(sum.oracle_checks);
    } else {
        sum.min_ratio = 0;
    }
    sum.final_m0 = pl.base().size();
    sum.final_answer = pl.answer_size();
    return sum;
}

}  // namespace dynmatch::harness
