#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynmatch/core_graph.hpp"
#include "json.hpp"

namespace dynmatch::harness {

class StreamError : public Error {
public:
    using Error::Error;
};

enum class Op : std::uint8_t { insert, erase };

struct UpdateEvent {
    Op op = Op::insert;
    VertexId u = 0;
    VertexId v = 0;
    std::size_t seq = 0;

    bool operator==(const UpdateEvent&) const = default;
};

struct StreamSpec {
    std::string generator = "erdos-churn";
    std::size_t n = 0;
    std::uint32_t delta = 0;
    std::size_t length = 0;
    std::uint64_t adversary_seed = 0;
    double insert_prob = 0.6;  // erdos-churn, bipartite-churn
    std::size_t window = 64;   // sliding-window
    std::string path;          // file
};

inline const std::vector<std::string>& generator_names() {
    static const std::vector<std::string> names{"erdos-churn", "sliding-window", "clique-pm", "bipartite-churn",
                                                "file"};
    return names;
}

namespace detail {

// Present edge set with O(1) uniform sampling and removal.
class EdgePool {
public:
    explicit EdgePool(std::size_t n) : degree_(n, 0) {}

    bool contains(EdgeKey e) const { return pos_.count(e.code()) != 0; }
    std::size_t size() const { return keys_.size(); }
    bool empty() const { return keys_.empty(); }
    std::uint32_t degree(VertexId v) const { return degree_[v]; }

    void add(EdgeKey e) {
        pos_[e.code()] = keys_.size();
        keys_.push_back(e);
        ++degree_[e.lo];
        ++degree_[e.hi];
    }

    void remove(EdgeKey e) {
        auto it = pos_.find(e.code());
        const std::size_t i = it->second;
        pos_.erase(it);
        if (i + 1 != keys_.size()) {
            keys_[i] = keys_.back();
            pos_[keys_[i].code()] = i;
        }
        keys_.pop_back();
        --degree_[e.lo];
        --degree_[e.hi];
    }

    EdgeKey pick(std::mt19937_64& rng) const { return keys_[rng() % keys_.size()]; }

private:
    std::vector<EdgeKey> keys_;
    std::unordered_map<std::uint64_t, std::size_t> pos_;
    std::vector<std::uint32_t> degree_;
};

class Emitter {
public:
    explicit Emitter(std::vector<UpdateEvent>& out) : out_(out) {}
    void ins(EdgeKey e) { out_.push_back(UpdateEvent{Op::insert, e.lo, e.hi, out_.size()}); }
    void del(EdgeKey e) { out_.push_back(UpdateEvent{Op::erase, e.lo, e.hi, out_.size()}); }

private:
    std::vector<UpdateEvent>& out_;
};

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Random absent pair (u from [lo_u, hi_u), v from [lo_v, hi_v)) within the cap.
inline bool draw_pair(const EdgePool& pool, std::uint32_t cap, std::mt19937_64& rng, VertexId lo_u, VertexId hi_u,
                      VertexId lo_v, VertexId hi_v, EdgeKey& out) {
    for (int tries = 0; tries < 256; ++tries) {
        const VertexId u = lo_u + static_cast<VertexId>(rng() % (hi_u - lo_u));
        const VertexId v = lo_v + static_cast<VertexId>(rng() % (hi_v - lo_v));
        if (u == v) continue;
        const EdgeKey e = EdgeKey::make(u, v);
        if (pool.contains(e) || pool.degree(u) >= cap || pool.degree(v) >= cap) continue;
        out = e;
        return true;
    }
    return false;
}

inline std::vector<UpdateEvent> churn(const StreamSpec& s, bool bipartite) {
    if (s.n < 2 || (bipartite && s.n < 2)) throw StreamError("churn generators need n >= 2");
    std::mt19937_64 rng(s.adversary_seed);
    std::vector<UpdateEvent> out;
    Emitter emit(out);
    EdgePool pool(s.n);
    const VertexId n = static_cast<VertexId>(s.n);
    const VertexId half = n / 2;
    while (out.size() < s.length) {
        const bool want_insert = pool.empty() || unit(rng) < s.insert_prob;
        EdgeKey e;
        const bool found = want_insert && (bipartite ? draw_pair(pool, s.delta, rng, 0, half, half, n, e)
                                                     : draw_pair(pool, s.delta, rng, 0, n, 0, n, e));
        if (found) {
            pool.add(e);
            emit.ins(e);
        } else if (!pool.empty()) {
            e = pool.pick(rng);
            pool.remove(e);
            emit.del(e);
        } else {
            throw StreamError("generator cannot make progress; check n and delta");
        }
    }
    return out;
}

inline std::vector<UpdateEvent> sliding_window(const StreamSpec& s) {
    if (s.window < 1) throw StreamError("sliding-window needs window >= 1");
    if (s.n < 2) throw StreamError("sliding-window needs n >= 2");
    std::mt19937_64 rng(s.adversary_seed);
    std::vector<UpdateEvent> out;
    Emitter emit(out);
    EdgePool pool(s.n);
    std::vector<EdgeKey> inserted;
    const VertexId n = static_cast<VertexId>(s.n);
    for (std::size_t t = 0; out.size() < s.length; ++t) {
        if (t >= s.window) {
            const EdgeKey old = inserted[t - s.window];
            pool.remove(old);
            emit.del(old);
            if (out.size() >= s.length) break;
        }
        EdgeKey e;
        if (!draw_pair(pool, s.delta, rng, 0, n, 0, n, e)) throw StreamError("sliding-window: no insertable pair");
        pool.add(e);
        inserted.push_back(e);
        emit.ins(e);
    }
    return out;
}

// Clique on the first n/2 vertices plus pendant edges i -- i + n/2, inserted
// in random order, then `length` churn events on clique edges.
inline std::vector<UpdateEvent> clique_pm(const StreamSpec& s) {
    const VertexId half = static_cast<VertexId>(s.n / 2);
    if (half < 2) throw StreamError("clique-pm needs n >= 4");
    if (s.delta < half) {
        throw StreamError("clique-pm needs delta >= n/2 (" + std::to_string(half) + "), got " +
                          std::to_string(s.delta));
    }
    std::mt19937_64 rng(s.adversary_seed);
    std::vector<EdgeKey> build;
    for (VertexId u = 0; u < half; ++u) {
        for (VertexId v = u + 1; v < half; ++v) build.push_back(EdgeKey{u, v});
        build.push_back(EdgeKey{u, u + half});
    }
    std::shuffle(build.begin(), build.end(), rng);
    std::vector<UpdateEvent> out;
    Emitter emit(out);
    EdgePool present(s.n);
    for (const EdgeKey& e : build) {
        present.add(e);
        emit.ins(e);
    }
    EdgePool removed(s.n);
    for (std::size_t t = 0; t < s.length; ++t) {
        const bool only_pendants = present.size() == half;
        const bool reinsert = !removed.empty() && (only_pendants || unit(rng) < 0.5);
        if (reinsert) {
            const EdgeKey e = removed.pick(rng);
            removed.remove(e);
            present.add(e);
            emit.ins(e);
        } else {
            EdgeKey e;
            do {
                e = present.pick(rng);
            } while (e.hi >= half);
            present.remove(e);
            removed.add(e);
            emit.del(e);
        }
    }
    return out;
}

inline std::vector<UpdateEvent> from_edge_list(const StreamSpec& s) {
    std::ifstream in(s.path);
    if (!in) throw StreamError("cannot open edge list " + s.path);
    std::vector<UpdateEvent> out;
    Emitter emit(out);
    std::string line;
    std::unordered_map<std::uint64_t, bool> seen;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == '%') continue;
        std::istringstream ls(line);
        long long u = 0, v = 0;
        if (!(ls >> u >> v)) throw StreamError("bad edge list line: " + line);
        if (u < 0 || v < 0) throw StreamError("negative vertex id: " + line);
        if (u == v) continue;
        const EdgeKey e = EdgeKey::make(static_cast<VertexId>(u), static_cast<VertexId>(v));
        if (!seen.emplace(e.code(), true).second) continue;
        emit.ins(e);
        if (s.length > 0 && out.size() >= s.length) break;
    }
    return out;
}

}  // namespace detail

/// Materializes the whole stream from the adversary seed alone.
inline std::vector<UpdateEvent> generate_stream(const StreamSpec& spec) {
    if (spec.generator == "file") return detail::from_edge_list(spec);
    if (spec.delta < 1) throw StreamError("delta must be at least 1");
    if (spec.generator == "erdos-churn") return detail::churn(spec, false);
    if (spec.generator == "bipartite-churn") return detail::churn(spec, true);
    if (spec.generator == "sliding-window") return detail::sliding_window(spec);
    if (spec.generator == "clique-pm") return detail::clique_pm(spec);
    throw StreamError("unknown generator: " + spec.generator);
}

inline nlohmann::json to_json(const UpdateEvent& e) {
    return nlohmann::json{{"op", e.op == Op::insert ? "ins" : "del"}, {"u", e.u}, {"v", e.v}};
}

inline void write_stream(std::ostream& os, const std::vector<UpdateEvent>& events) {
    for (const auto& e : events) os << to_json(e).dump() << '\n';
}

inline std::vector<UpdateEvent> read_stream(std::istream& is) {
    std::vector<UpdateEvent> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const std::string op = j.at("op").get<std::string>();
            if (op != "ins" && op != "del") throw StreamError("unknown op '" + op + "'");
            const auto u = j.at("u").get<long long>();
            const auto v = j.at("v").get<long long>();
            if (u < 0 || v < 0 || u >= kNoVertex || v >= kNoVertex) throw StreamError("vertex id out of range");
            out.push_back(UpdateEvent{op == "ins" ? Op::insert : Op::erase, static_cast<VertexId>(u),
                                      static_cast<VertexId>(v), out.size()});
        } catch (const nlohmann::json::exception& ex) {
            throw StreamError("stream line " + std::to_string(lineno) + ": " + ex.what());
        } catch (const StreamError& ex) {
            throw StreamError("stream line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return out;
}

inline std::vector<UpdateEvent> read_stream_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StreamError("cannot open stream " + path);
    return read_stream(in);
}

/// Smallest vertex count covering every id in the stream.
inline std::size_t infer_vertex_count(const std::vector<UpdateEvent>& events) {
    std::size_t n = 0;
    for (const auto& e : events) n = std::max<std::size_t>(n, std::max(e.u, e.v) + std::size_t{1});
    return n;
}

/// Throws StreamError naming the first event that is not replayable under
/// (n, delta): loops, ids out of range, duplicate inserts, absent deletes,
/// degree above delta.
inline void check_replay_valid(const std::vector<UpdateEvent>& events, std::size_t n, std::uint32_t delta) {
    detail::EdgePool pool(n);
    for (const auto& ev : events) {
        const std::string at = "event seq " + std::to_string(ev.seq) + ": ";
        if (ev.u >= n || ev.v >= n) throw StreamError(at + "vertex id out of range");
        if (ev.u == ev.v) throw StreamError(at + "self-loop");
        const EdgeKey e = EdgeKey::make(ev.u, ev.v);
        if (ev.op == Op::insert) {
            if (pool.contains(e)) throw StreamError(at + "duplicate insertion of " + to_string(e));
            if (pool.degree(e.lo) >= delta || pool.degree(e.hi) >= delta) {
                throw StreamError(at + "insertion of " + to_string(e) + " exceeds delta");
            }
            pool.add(e);
        } else {
            if (!pool.contains(e)) throw StreamError(at + "deletion of absent edge " + to_string(e));
            pool.remove(e);
        }
    }
}

}  // namespace dynmatch::harness
