#pragma once

#include <cstdint>
#include <list>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace coldrl {

struct CacheEntry {
    std::string key;
    std::uint64_t size = 0;
    double inserted_at = 0.0;
    double last_access = 0.0;
    std::uint64_t hit_count = 0;   // hits since insertion, excluding the inserting miss
    double expires_at = 0.0;       // inserted_at + ttl of the inserting record
    double origin_rtt = 0.0;       // ms, from the most recent origin fetch
};

// Byte-capacity cache bookkeeping: resident entries, a strict recency order
// (front = most recently used), and an expiry heap for cheap reclamation of
// dead entries at eviction time.
class CacheState {
public:
    explicit CacheState(std::uint64_t capacity) : capacity_(capacity) {}

    std::uint64_t capacity() const { return capacity_; }
    std::uint64_t used() const { return used_; }
    double now() const { return now_; }
    std::size_t resident_count() const { return entries_.size(); }

    bool resident(const std::string& key) const { return entries_.contains(key); }

    const CacheEntry& entry(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end())
            throw std::logic_error("cache: entry lookup for non-resident key '" + key + "'");
        return it->second.entry;
    }

    // Recency order, most-recently-used first. Exactly the resident keys.
    const std::list<std::string>& recency() const { return recency_; }

    void advance_clock(double ts) { now_ = ts; }

    // nullptr when absent. Does not touch recency.
    const CacheEntry* find(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second.entry;
    }

    void touch(const std::string& key) {
        auto it = entries_.find(key);
        it->second.entry.last_access = now_;
        it->second.entry.hit_count += 1;
        recency_.splice(recency_.begin(), recency_, it->second.pos);
    }

    void admit(const CacheEntry& e) {
        if (resident(e.key))
            throw std::logic_error("cache: double admit for key '" + e.key + "'");
        recency_.push_front(e.key);
        entries_.emplace(e.key, Resident{e, recency_.begin()});
        used_ += e.size;
        expiry_.push({e.expires_at, e.key});
    }

    void remove(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end())
            throw std::logic_error("cache: remove of non-resident key '" + key + "'");
        used_ -= it->second.entry.size;
        recency_.erase(it->second.pos);
        entries_.erase(it);
    }

    bool expired(const CacheEntry& e) const { return now_ >= e.expires_at; }

    // Pops expired entries off the expiry heap, invoking fn(entry) and
    // removing each. Stale heap records (re-admitted keys) are skipped.
    template <typename Fn>
    void reclaim_expired(Fn&& fn) {
        while (!expiry_.empty() && expiry_.top().expires_at <= now_) {
            auto top = expiry_.top();
            expiry_.pop();
            auto it = entries_.find(top.key);
            if (it == entries_.end() || it->second.entry.expires_at != top.expires_at)
                continue;  // stale: evicted or re-admitted since
            fn(it->second.entry);
            remove(top.key);
        }
    }

    // Debug audit: used == sum of resident sizes, recency matches residency.
    bool audit() const {
        std::uint64_t sum = 0;
        for (const auto& [k, r] : entries_) sum += r.entry.size;
        if (sum != used_ || recency_.size() != entries_.size()) return false;
        for (const auto& k : recency_)
            if (!entries_.contains(k)) return false;
        return true;
    }

private:
    struct Resident {
        CacheEntry entry;
        std::list<std::string>::iterator pos;
    };
    struct ExpiryItem {
        double expires_at;
        std::string key;
        bool operator<(const ExpiryItem& o) const { return expires_at > o.expires_at; }
    };

    std::uint64_t capacity_;
    std::uint64_t used_ = 0;
    double now_ = 0.0;
    std::list<std::string> recency_;
    std::unordered_map<std::string, Resident> entries_;
    std::priority_queue<ExpiryItem> expiry_;
};

} // namespace coldrl
