#pragma once

// Independent reference implementations used as oracles by the unit tests
// and the acceptance suite. Deliberately naive: correctness over speed, and
// no code shared with the library under test beyond public data types.

#include <coldrl/rng.hpp>
#include <coldrl/trace.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ref {

// --- brute-force LRU byte cache ---------------------------------------------

// Mirrors the simulator contract: lazy expiry at lookup, expired entries
// reclaimed before victim selection, objects larger than the cache bypass
// it, victims taken coldest-first until the shortfall is covered.
class NaiveLruCache {
public:
    explicit NaiveLruCache(std::uint64_t capacity) : capacity_(capacity) {}

    // Returns true on a hit.
    bool request(const coldrl::RequestRecord& r) {
        now_ = r.ts;
        auto it = find(r.key);
        if (it != entries_.end() && now_ >= it->expires_at) {
            entries_.erase(it);
            it = entries_.end();
        }
        if (it != entries_.end()) {
            Entry e = *it;
            entries_.erase(it);
            entries_.push_front(e);  // front = most recently used
            return true;
        }
        if (r.size > capacity_) return false;
        if (used() + r.size > capacity_) {
            // Reclaim every dead entry first, then evict coldest-first.
            for (auto e = entries_.begin(); e != entries_.end();)
                e = e->expires_at <= now_ ? entries_.erase(e) : std::next(e);
            while (used() + r.size > capacity_ && !entries_.empty())
                entries_.pop_back();
        }
        entries_.push_front({r.key, r.size, r.ts + r.ttl});
        return false;
    }

    std::set<std::string> resident_keys() const {
        std::set<std::string> keys;
        for (const auto& e : entries_) keys.insert(e.key);
        return keys;
    }

    std::uint64_t used() const {
        std::uint64_t sum = 0;
        for (const auto& e : entries_) sum += e.size;
        return sum;
    }

private:
    struct Entry {
        std::string key;
        std::uint64_t size;
        double expires_at;
    };

    std::deque<Entry>::iterator find(const std::string& key) {
        return std::find_if(entries_.begin(), entries_.end(),
                            [&](const Entry& e) { return e.key == key; });
    }

    std::uint64_t capacity_;
    double now_ = 0.0;
    std::deque<Entry> entries_;
};

// --- page-based ARC ----------------------------------------------------------

// Textbook ARC over unit-size pages, using the same REPLACE variant the
// byte generalization is specified with: evict from T1 while |T1| >= max(1, p)
// else from T2; a ghost hit moves p by one page, clamped to [0, c]. No TTLs.
class PageArc {
public:
    explicit PageArc(std::size_t c) : c_(c) {}

    bool request(const std::string& key) {
        if (contains(t1_, key)) {
            erase(t1_, key);
            t2_.push_front(key);
            return true;
        }
        if (contains(t2_, key)) {
            erase(t2_, key);
            t2_.push_front(key);
            return true;
        }
        // Miss. Make room first (the simulator evicts before admission).
        if (t1_.size() + t2_.size() >= c_) replace();
        if (contains(b1_, key)) {
            p_ = std::min<double>(static_cast<double>(c_), p_ + 1.0);
            erase(b1_, key);
            t2_.push_front(key);
        } else if (contains(b2_, key)) {
            p_ = std::max(0.0, p_ - 1.0);
            erase(b2_, key);
            t2_.push_front(key);
        } else {
            t1_.push_front(key);
        }
        trim();
        return false;
    }

    double p() const { return p_; }

private:
    static bool contains(const std::deque<std::string>& l, const std::string& k) {
        return std::find(l.begin(), l.end(), k) != l.end();
    }
    static void erase(std::deque<std::string>& l, const std::string& k) {
        l.erase(std::find(l.begin(), l.end(), k));
    }

    void replace() {
        const bool from_t1 =
            !t1_.empty() &&
            (t2_.empty() || static_cast<double>(t1_.size()) >= std::max(1.0, p_));
        auto& src = from_t1 ? t1_ : t2_;
        auto& ghost = from_t1 ? b1_ : b2_;
        ghost.push_front(src.back());
        src.pop_back();
        trim();
    }

    void trim() {
        while (!b1_.empty() && t1_.size() + b1_.size() > c_) b1_.pop_back();
        while (!b2_.empty() &&
               t1_.size() + t2_.size() + b1_.size() + b2_.size() > 2 * c_)
            b2_.pop_back();
    }

    std::size_t c_;
    double p_ = 0.0;
    std::deque<std::string> t1_, t2_, b1_, b2_;
};

// --- random traces -----------------------------------------------------------

struct RandomTraceOptions {
    std::size_t n_requests = 10000;
    std::size_t key_pool = 50;
    std::uint64_t size_min = 1;
    std::uint64_t size_max = 4096;
    double ttl_min = 0.5;
    double ttl_max = 60.0;
    double mean_gap = 0.05;
};

inline coldrl::Trace random_trace(std::uint64_t seed, const RandomTraceOptions& opt) {
    coldrl::Xoshiro256 rng(seed);
    coldrl::Trace trace;
    trace.meta.generator = "test-random";
    trace.meta.seed = seed;
    // Per-key size fixed at first draw (trace invariant); TTLs vary freely.
    std::vector<std::uint64_t> sizes(opt.key_pool, 0);
    double ts = 0.0;
    for (std::size_t i = 0; i < opt.n_requests; ++i) {
        std::uint64_t k = rng.uniform_u64(opt.key_pool);
        if (sizes[k] == 0)
            sizes[k] = opt.size_min + rng.uniform_u64(opt.size_max - opt.size_min + 1);
        coldrl::RequestRecord r;
        r.ts = ts;
        r.key = "k" + std::to_string(k);
        r.size = sizes[k];
        r.ttl = rng.uniform(opt.ttl_min, opt.ttl_max);
        r.origin_rtt = rng.uniform(1.0, 200.0);
        trace.records.push_back(std::move(r));
        ts += rng.exp_gap(1.0 / opt.mean_gap);
    }
    return trace;
}

// --- O(n^2) label oracle ------------------------------------------------------

// y = 1 iff some request for `key` exists at t with now < t < expires_at,
// found by scanning the whole trace.
inline bool label_scan(const coldrl::Trace& trace, const std::string& key,
                       double now, double expires_at) {
    for (const auto& r : trace.records)
        if (r.key == key && r.ts > now && r.ts < expires_at) return true;
    return false;
}

} // namespace ref
