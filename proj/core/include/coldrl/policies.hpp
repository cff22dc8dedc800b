#pragma once

#include "coldrl/policy.hpp"

#include <cstdint>
#include <list>
#include <memory>
#include <unordered_map>

namespace coldrl {

// Walks the recency tail, coldest first, until enough bytes accumulate.
class LruPolicy : public EvictionPolicy {
public:
    std::string_view name() const override { return "lru"; }
    std::vector<std::string> select_victims(const CacheState&, std::uint64_t needed) override;
};

// Pure helper used by every fallback path: the LRU victim set for `needed`
// bytes (a suffix of the recency order, taken coldest first).
std::vector<std::string> lru_victims(const CacheState& state, std::uint64_t needed);

// Ascending hit_count, ties broken least-recently-used, then key.
class LfuPolicy : public EvictionPolicy {
public:
    std::string_view name() const override { return "lfu"; }
    std::vector<std::string> select_victims(const CacheState&, std::uint64_t needed) override;
};

// Descending size, ties broken least-recently-used, then key.
class SizePolicy : public EvictionPolicy {
public:
    std::string_view name() const override { return "size"; }
    std::vector<std::string> select_victims(const CacheState&, std::uint64_t needed) override;
};

// Rank blend of recency and size: score = w*rank_recency/n +
// (1-w)*rank_size/n with higher score = colder and larger; victims taken in
// descending score. w=1 degenerates to LRU, w=0 to Size.
class HybridPolicy : public EvictionPolicy {
public:
    explicit HybridPolicy(double w = 0.5);
    std::string_view name() const override { return "hybrid"; }
    std::vector<std::string> select_victims(const CacheState&, std::uint64_t needed) override;

private:
    double w_;
};

// ARC generalized to bytes: T1/T2 resident lists and B1/B2 ghosts are
// measured in bytes, as is the adaptation target p. Ghost hits adapt p by
// the ghost's byte size, clamped to [0, capacity]. Victims come from the T1
// tail while t1_bytes >= max(1, p), else from the T2 tail.
class ArcPolicy : public EvictionPolicy {
public:
    std::string_view name() const override { return "arc"; }
    std::vector<std::string> select_victims(const CacheState&, std::uint64_t needed) override;
    void on_hit(const CacheState&, const std::string& key) override;
    void on_admit(const CacheState&, const std::string& key) override;
    void on_evict(const CacheState&, const std::string& key, bool expired) override;

    double p() const { return p_; }

private:
    struct List {
        std::list<std::string> order;  // front = MRU
        std::unordered_map<std::string, std::pair<std::list<std::string>::iterator,
                                                  std::uint64_t>> index;  // key -> (pos, size)
        std::uint64_t bytes = 0;

        bool contains(const std::string& key) const { return index.contains(key); }
        void push_front(const std::string& key, std::uint64_t size);
        std::uint64_t erase(const std::string& key);  // returns size
        void pop_back();                              // drop LRU element
    };

    void trim_ghosts(std::uint64_t capacity);

    List t1_, t2_, b1_, b2_;
    double p_ = 0.0;  // bytes
};

std::unique_ptr<EvictionPolicy> make_classical_policy(std::string_view name);

} // namespace coldrl
