#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dynmatch {

using VertexId = std::uint32_t;
inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DuplicateEdgeError : public Error {
public:
    using Error::Error;
};

class EdgeNotFoundError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

class LoopError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// EdgeKey / Rank
// ---------------------------------------------------------------------------

/// Unordered vertex pair stored canonically as lo < hi.
struct EdgeKey {
    VertexId lo = 0;
    VertexId hi = 0;

    static EdgeKey make(VertexId u, VertexId v) {
        if (u == v) throw LoopError("self-loop on vertex " + std::to_string(u));
        return u < v ? EdgeKey{u, v} : EdgeKey{v, u};
    }

    static constexpr EdgeKey from_code(std::uint64_t code) {
        return EdgeKey{static_cast<VertexId>(code >> 32), static_cast<VertexId>(code & 0xffffffffu)};
    }

    constexpr std::uint64_t code() const { return (std::uint64_t{lo} << 32) | hi; }

    constexpr VertexId other(VertexId v) const { return v == lo ? hi : lo; }
    constexpr bool touches(VertexId v) const { return v == lo || v == hi; }

    auto operator<=>(const EdgeKey&) const = default;
    bool operator==(const EdgeKey&) const = default;
};

inline std::string to_string(const EdgeKey& e) {
    return "(" + std::to_string(e.lo) + "," + std::to_string(e.hi) + ")";
}

/// Fixed-point rank value/2^64 in [0,1). Ties on value are broken by the
/// owning edge's key, so distinct edges never compare equal.
struct Rank {
    std::uint64_t value = 0;
    EdgeKey tiebreak{};

    static constexpr Rank sentinel() {
        return Rank{std::numeric_limits<std::uint64_t>::max(), EdgeKey{kNoVertex, kNoVertex}};
    }

    /// Smallest rank whose value is `value`; used as a range-scan lower bound.
    static constexpr Rank floor(std::uint64_t value) { return Rank{value, EdgeKey{0, 0}}; }

    /// Rank of edge `e` at fractional position x in [0,1].
    static Rank from_double(double x, EdgeKey e) { return Rank{fraction_to_fixed(x), e}; }

    static std::uint64_t fraction_to_fixed(double x) {
        if (!(x > 0.0)) return 0;
        if (x >= 1.0) return std::numeric_limits<std::uint64_t>::max();
        const long double scaled = std::ldexp(static_cast<long double>(x), 64);
        if (scaled >= 18446744073709551615.0L) return std::numeric_limits<std::uint64_t>::max();
        return static_cast<std::uint64_t>(scaled);
    }

    bool is_sentinel() const { return *this == sentinel(); }

    double as_double() const { return std::ldexp(static_cast<double>(value), -64); }

    auto operator<=>(const Rank&) const = default;
    bool operator==(const Rank&) const = default;
};

// ---------------------------------------------------------------------------
// Random tapes and configuration
// ---------------------------------------------------------------------------

enum class Side : std::uint8_t { A, B };

struct EdgeRecord {
    EdgeKey key{};
    std::vector<Rank> ranks;            // pi_0 .. pi_L
    std::vector<std::uint8_t> sampled;  // is_sampled_1 .. is_sampled_L

    const Rank& rank(int level) const { return ranks.at(static_cast<std::size_t>(level)); }
    bool is_sampled(int level) const { return sampled.at(static_cast<std::size_t>(level - 1)) != 0; }
    int levels() const { return static_cast<int>(sampled.size()); }

    bool operator==(const EdgeRecord&) const = default;
};

struct VertexTape {
    std::vector<Side> partition;  // partition_1 .. partition_L

    Side side(int level) const { return partition.at(static_cast<std::size_t>(level - 1)); }

    bool operator==(const VertexTape&) const = default;
};

struct InstanceConfig {
    std::size_t n = 0;
    std::uint32_t delta_cap = 1;
    int levels = 2;
    double sample_p = 0.03;
    double final_eps = 0.0;  // 0 selects augmenting depth k = levels + 1
    std::uint64_t algo_seed = 0;

    void validate() const {
        if (n == 0) throw ConfigError("vertex count must be positive");
        if (n >= kNoVertex) throw ConfigError("vertex count exceeds id space");
        if (delta_cap < 1) throw ConfigError("degree cap must be at least 1");
        if (levels < 1) throw ConfigError("levels must be at least 1");
        if (!(sample_p > 0.0 && sample_p < 0.125)) throw ConfigError("sample_p must lie in (0, 1/8)");
        if (final_eps < 0.0) throw ConfigError("final_eps must be non-negative");
    }

    /// Augmenting-path depth parameter of the final matcher.
    int final_depth() const {
        if (final_eps <= 0.0) return levels + 1;
        return std::max(1, static_cast<int>(std::ceil(1.0 / final_eps)));
    }
};

/// Fixed-point rank thresholds t_0 = 1 > t_1 > ... > t_L with t_i = delta^(-i/L).
inline std::vector<std::uint64_t> make_thresholds(std::uint32_t delta_cap, int levels) {
    std::vector<std::uint64_t> t(static_cast<std::size_t>(levels) + 1);
    for (int i = 0; i <= levels; ++i) {
        const double x = std::pow(static_cast<double>(delta_cap), -static_cast<double>(i) / levels);
        t[static_cast<std::size_t>(i)] = Rank::fraction_to_fixed(x);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Instance
// ---------------------------------------------------------------------------

/// Dynamic edge set over a fixed vertex universe together with every random
/// bit the algorithm consumes. Vertex tapes are drawn at construction; edge
/// tapes are drawn on each arrival.
class Instance {
public:
    explicit Instance(InstanceConfig config) : config_(std::move(config)) {
        config_.validate();
        rng_.seed(config_.algo_seed);
        thresholds_ = make_thresholds(config_.delta_cap, config_.levels);
        tapes_.resize(config_.n);
        for (auto& tape : tapes_) {
            tape.partition.resize(static_cast<std::size_t>(config_.levels));
            for (auto& side : tape.partition) side = (rng_() >> 63) != 0 ? Side::B : Side::A;
        }
        degree_.assign(config_.n, 0);
    }

    const InstanceConfig& config() const { return config_; }
    std::size_t vertex_count() const { return config_.n; }
    int levels() const { return config_.levels; }

    const VertexTape& tape(VertexId v) const { return tapes_.at(v); }
    const std::vector<VertexTape>& tapes() const { return tapes_; }
    Side partition(VertexId v, int level) const { return tapes_.at(v).side(level); }

    /// Inserts {u,v}, drawing fresh ranks and sample bits.
    const EdgeRecord& admit_edge(VertexId u, VertexId v) {
        const EdgeKey key = checked_key(u, v);
        check_insertable(key);
        EdgeRecord rec;
        rec.key = key;
        rec.ranks.resize(static_cast<std::size_t>(config_.levels) + 1);
        for (auto& r : rec.ranks) r = Rank{rng_(), key};
        rec.sampled.resize(static_cast<std::size_t>(config_.levels));
        for (auto& s : rec.sampled) s = unit_draw() < config_.sample_p ? 1 : 0;
        return store(std::move(rec));
    }

    /// Inserts an edge with a caller-supplied tape (replaying a fixed tape).
    const EdgeRecord& admit_record(EdgeRecord rec) {
        const EdgeKey key = checked_key(rec.key.lo, rec.key.hi);
        if (!(key == rec.key)) throw ConfigError("edge record key is not canonical");
        if (rec.ranks.size() != static_cast<std::size_t>(config_.levels) + 1 ||
            rec.sampled.size() != static_cast<std::size_t>(config_.levels)) {
            throw ConfigError("edge record does not match the configured level count");
        }
        for (const auto& r : rec.ranks) {
            if (!(r.tiebreak == key)) throw ConfigError("rank tiebreak must equal the edge key");
        }
        check_insertable(key);
        return store(std::move(rec));
    }

    EdgeRecord retire_edge(VertexId u, VertexId v) {
        const EdgeKey key = checked_key(u, v);
        auto it = edges_.find(key.code());
        if (it == edges_.end()) throw EdgeNotFoundError("edge " + to_string(key) + " is not present");
        EdgeRecord rec = std::move(it->second);
        edges_.erase(it);
        --degree_[key.lo];
        --degree_[key.hi];
        return rec;
    }

    bool contains(EdgeKey key) const { return edges_.count(key.code()) != 0; }

    const EdgeRecord* find(EdgeKey key) const {
        auto it = edges_.find(key.code());
        return it == edges_.end() ? nullptr : &it->second;
    }

    const EdgeRecord& record(EdgeKey key) const {
        const EdgeRecord* rec = find(key);
        if (rec == nullptr) throw EdgeNotFoundError("edge " + to_string(key) + " is not present");
        return *rec;
    }

    std::size_t degree(VertexId v) const { return degree_.at(v); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::unordered_map<std::uint64_t, EdgeRecord>& edges() const { return edges_; }

    std::vector<EdgeKey> edge_keys() const {
        std::vector<EdgeKey> keys;
        keys.reserve(edges_.size());
        for (const auto& [code, rec] : edges_) keys.push_back(rec.key);
        std::sort(keys.begin(), keys.end());
        return keys;
    }

    /// t_i as a fixed-point value, i in [0, L].
    std::uint64_t threshold(int i) const { return thresholds_.at(static_cast<std::size_t>(i)); }

    /// Level i in [1, L] with r in (t_i, t_{i-1}] for i < L; level L holds [0, t_{L-1}].
    int level_of_rank(const Rank& r) const {
        for (int i = 1; i < config_.levels; ++i) {
            if (r.value > thresholds_[static_cast<std::size_t>(i)]) return i;
        }
        return config_.levels;
    }

    /// Lower rank bound of level j: t_j for j < L and 0 for the last level.
    Rank level_floor(int j) const {
        if (j >= config_.levels) return Rank::floor(0);
        return Rank::floor(thresholds_.at(static_cast<std::size_t>(j)));
    }

private:
    EdgeKey checked_key(VertexId u, VertexId v) const {
        if (u >= config_.n || v >= config_.n) {
            throw ConfigError("vertex id out of range: " + std::to_string(std::max(u, v)));
        }
        return EdgeKey::make(u, v);
    }

    void check_insertable(const EdgeKey& key) const {
        if (edges_.count(key.code()) != 0) throw DuplicateEdgeError("edge " + to_string(key) + " already present");
        if (degree_[key.lo] >= config_.delta_cap || degree_[key.hi] >= config_.delta_cap) {
            throw CapacityError("inserting " + to_string(key) + " exceeds degree cap " +
                                std::to_string(config_.delta_cap));
        }
    }

    const EdgeRecord& store(EdgeRecord rec) {
        ++degree_[rec.key.lo];
        ++degree_[rec.key.hi];
        auto [it, inserted] = edges_.emplace(rec.key.code(), std::move(rec));
        return it->second;
    }

    double unit_draw() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    InstanceConfig config_;
    std::mt19937_64 rng_;
    std::vector<std::uint64_t> thresholds_;
    std::vector<VertexTape> tapes_;
    std::vector<std::uint32_t> degree_;
    std::unordered_map<std::uint64_t, EdgeRecord> edges_;
};

inline Instance create_instance(InstanceConfig config) { return Instance(std::move(config)); }

}  // namespace dynmatch
