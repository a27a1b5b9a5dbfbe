#include <gtest/gtest.h>

#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "dynmatch/harness/replay.hpp"
#include "dynmatch/harness/stream.hpp"
#include "dynmatch/harness/validation.hpp"

using namespace dynmatch;
using namespace dynmatch::harness;

namespace {

StreamSpec spec(const std::string& gen, std::size_t n, std::uint32_t delta, std::size_t len, std::uint64_t seed) {
    StreamSpec s;
    s.generator = gen;
    s.n = n;
    s.delta = delta;
    s.length = len;
    s.adversary_seed = seed;
    return s;
}

}  // namespace

TEST(Stream, GeneratorsAreDeterministicAndValid) {
    for (const std::string gen : {"erdos-churn", "bipartite-churn", "sliding-window"}) {
        const auto a = generate_stream(spec(gen, 40, 6, 400, 9));
        const auto b = generate_stream(spec(gen, 40, 6, 400, 9));
        const auto c = generate_stream(spec(gen, 40, 6, 400, 10));
        EXPECT_EQ(a, b) << gen;
        EXPECT_NE(a, c) << gen;
        EXPECT_EQ(a.size(), 400u) << gen;
        EXPECT_NO_THROW(check_replay_valid(a, 40, 6)) << gen;
    }
}

TEST(Stream, BipartiteChurnCrossesHalves) {
    for (const auto& ev : generate_stream(spec("bipartite-churn", 30, 5, 300, 2))) {
        EXPECT_NE(ev.u < 15, ev.v < 15);
    }
}

TEST(Stream, CliquePmCounts) {
    const auto ev = generate_stream(spec("clique-pm", 8, 4, 0, 1));
    ASSERT_EQ(ev.size(), 10u);  // K_4 has 6 edges, plus 4 pendants
    std::size_t pendants = 0;
    for (const auto& e : ev) {
        EXPECT_EQ(e.op, Op::insert);
        const EdgeKey k = EdgeKey::make(e.u, e.v);
        if (k.hi >= 4) {
            ++pendants;
            EXPECT_EQ(k.hi, k.lo + 4);
        }
    }
    EXPECT_EQ(pendants, 4u);
    EXPECT_THROW(generate_stream(spec("clique-pm", 8, 3, 0, 1)), StreamError);
}

TEST(Stream, CliquePmChurnTouchesOnlyClique) {
    const auto ev = generate_stream(spec("clique-pm", 12, 6, 500, 3));
    ASSERT_EQ(ev.size(), 15u + 6u + 500u);
    for (std::size_t k = 21; k < ev.size(); ++k) EXPECT_LT(std::max(ev[k].u, ev[k].v), 6u);
    EXPECT_NO_THROW(check_replay_valid(ev, 12, 6));
}

TEST(Stream, SlidingWindowDeletesOldest) {
    StreamSpec s = spec("sliding-window", 50, 8, 300, 4);
    s.window = 10;
    const auto ev = generate_stream(s);
    std::deque<EdgeKey> live;
    for (const auto& e : ev) {
        const EdgeKey k = EdgeKey::make(e.u, e.v);
        if (e.op == Op::insert) {
            live.push_back(k);
            EXPECT_LE(live.size(), 10u);
        } else {
            ASSERT_FALSE(live.empty());
            EXPECT_EQ(live.front(), k);
            live.pop_front();
        }
    }
}

TEST(Stream, UnknownGenerator) { EXPECT_THROW(generate_stream(spec("nope", 4, 2, 4, 1)), StreamError); }

TEST(Stream, JsonRoundTrip) {
    const auto ev = generate_stream(spec("erdos-churn", 20, 4, 120, 5));
    std::stringstream ss;
    write_stream(ss, ev);
    EXPECT_EQ(read_stream(ss), ev);
}

TEST(Stream, ReadRejectsMalformed) {
    std::istringstream bad_op(R"({"op":"add","u":1,"v":2})");
    EXPECT_THROW(read_stream(bad_op), StreamError);
    std::istringstream bad_json("{\"op\":\"ins\",");
    EXPECT_THROW(read_stream(bad_json), StreamError);
    std::istringstream negative(R"({"op":"ins","u":-1,"v":2})");
    EXPECT_THROW(read_stream(negative), StreamError);
}

TEST(Stream, ReplayValidityErrors) {
    using E = UpdateEvent;
    EXPECT_THROW(check_replay_valid({E{Op::insert, 1, 1, 0}}, 4, 2), StreamError);
    EXPECT_THROW(check_replay_valid({E{Op::insert, 1, 9, 0}}, 4, 2), StreamError);
    EXPECT_THROW(check_replay_valid({E{Op::erase, 1, 2, 0}}, 4, 2), StreamError);
    EXPECT_THROW(check_replay_valid({E{Op::insert, 1, 2, 0}, E{Op::insert, 2, 1, 1}}, 4, 2), StreamError);
    EXPECT_THROW(check_replay_valid({E{Op::insert, 0, 1, 0}, E{Op::insert, 0, 2, 1}}, 4, 1), StreamError);
    EXPECT_NO_THROW(check_replay_valid({E{Op::insert, 0, 1, 0}, E{Op::erase, 1, 0, 1}}, 4, 1));
    try {
        check_replay_valid({E{Op::insert, 0, 1, 0}, E{Op::erase, 2, 3, 1}}, 4, 2);
        FAIL();
    } catch (const StreamError& ex) {
        EXPECT_NE(std::string(ex.what()).find("seq 1"), std::string::npos);
    }
}

TEST(Replay, EmptyStream) {
    ReplayOptions opt;
    opt.delta = 4;
    const auto sum = replay({}, opt);
    EXPECT_EQ(sum.updates, 0u);
    EXPECT_EQ(sum.final_answer, 0u);
}

TEST(Replay, SingleEdge) {
    ReplayOptions opt;
    opt.delta = 4;
    opt.oracle_every = 1;
    std::vector<MetricsRecord> recs;
    const auto sum = replay({UpdateEvent{Op::insert, 0, 1, 0}}, opt, [&](const MetricsRecord& r) { recs.push_back(r); });
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].mu, 1u);
    EXPECT_DOUBLE_EQ(*recs[0].ratio(), 1.0);
    EXPECT_DOUBLE_EQ(sum.final_ratio, 1.0);
    EXPECT_EQ(sum.n, 2u);
}

TEST(Replay, ErrorsNameTheEvent) {
    ReplayOptions opt;
    opt.delta = 4;
    try {
        replay({UpdateEvent{Op::insert, 0, 1, 0}, UpdateEvent{Op::insert, 1, 0, 1}}, opt);
        FAIL();
    } catch (const StreamError& ex) {
        EXPECT_NE(std::string(ex.what()).find("seq 1"), std::string::npos);
    }
}

TEST(Replay, MetricsAndRatios) {
    const auto ev = generate_stream(spec("erdos-churn", 60, 8, 600, 12));
    ReplayOptions opt;
    opt.n = 60;
    opt.delta = 8;
    opt.algo_seed = 3;
    opt.oracle_every = 50;
    std::size_t with_mu = 0;
    const auto sum = replay(ev, opt, [&](const MetricsRecord& r) {
        EXPECT_GE(r.answer, r.m0);
        EXPECT_EQ(r.level_deltas.size(), 2u);
        if (r.mu) {
            ++with_mu;
            EXPECT_GE(2 * r.m0, *r.mu);
            EXPECT_LE(r.answer, *r.mu);
        }
        const auto j = to_json(r);
        EXPECT_TRUE(j.contains("ratio"));
    });
    EXPECT_EQ(with_mu, 12u);
    EXPECT_EQ(sum.oracle_checks, 12u);
    EXPECT_GE(sum.min_ratio, 0.5);
    EXPECT_GE(sum.mean_ratio, sum.mean_m0_ratio);
    EXPECT_LE(sum.p50_ns, sum.p99_ns);
    EXPECT_LE(sum.p99_ns, sum.max_ns);
}

TEST(Replay, OracleDisabledAboveLimit) {
    const auto ev = generate_stream(spec("erdos-churn", 30, 4, 100, 1));
    ReplayOptions opt;
    opt.delta = 4;
    opt.oracle_limit = 10;
    const auto sum = replay(ev, opt);
    EXPECT_EQ(sum.oracle_checks, 0u);
}

TEST(Validation, BaseChecksSmall) {
    const auto r = run_base_checks(40, 6, 300, 2);
    EXPECT_EQ(r.checkpoints, 600u);
    EXPECT_EQ(r.state_mismatches, 0u);
    EXPECT_EQ(r.maximality_failures, 0u);
    EXPECT_EQ(r.bound_failures, 0u);
}

TEST(Validation, PipelineChecksSmall) {
    const auto r = run_pipeline_checks(24, 8, 150, 2, {1, 2, 3});
    EXPECT_EQ(r.checkpoints, 900u);
    EXPECT_EQ(r.equivalence_failures, 0u) << r.first_error;
    EXPECT_EQ(r.stability_violations, 0u) << r.first_error;
    EXPECT_GT(r.stability_checks, 0u);
    EXPECT_EQ(r.bound_failures, 0u) << r.first_error;
    EXPECT_EQ(r.final_path_failures, 0u) << r.first_error;
    EXPECT_EQ(r.final_ratio_failures, 0u) << r.first_error;
}

TEST(Validation, SmallSuitesRun) {
    SuiteParams sp;
    sp.trials = 200;
    sp.seeds = 1;
    EXPECT_TRUE(run_validation("pivot-level", sp).pass);
    sp.n = 24;
    sp.updates = 60;
    for (const char* s : {"equivalence", "level-stability", "final-approx"}) {
        const auto rep = run_validation(s, sp);
        EXPECT_TRUE(rep.pass) << s << " " << rep.details.dump();
    }
    EXPECT_THROW(run_validation("bogus", sp), ConfigError);
}

TEST(Validation, PivotSweepCoversAllLevels) {
    for (int L : {1, 2, 5}) EXPECT_EQ(run_pivot_sweep(L, 500, 3).failures, 0u);
}
