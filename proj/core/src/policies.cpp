#include "coldrl/policies.hpp"

#include <algorithm>
#include <stdexcept>

namespace coldrl {

std::string_view to_string(DecisionSource s) {
    switch (s) {
        case DecisionSource::classical: return "classical";
        case DecisionSource::learned: return "learned";
        case DecisionSource::shadow: return "shadow";
        case DecisionSource::fallback_timeout: return "fallback_timeout";
        case DecisionSource::fallback_error: return "fallback_error";
        case DecisionSource::fallback_breaker: return "fallback_breaker";
        case DecisionSource::fallback_rollout: return "fallback_rollout";
    }
    return "unknown";
}

std::vector<Candidate> k_tail_candidates(const CacheState& state, std::size_t k) {
    if (k < 1) throw std::invalid_argument("k_tail_candidates: K must be >= 1");
    std::vector<Candidate> out;
    out.reserve(k);
    const auto& recency = state.recency();
    for (auto it = recency.rbegin(); it != recency.rend() && out.size() < k; ++it) {
        const CacheEntry& e = state.entry(*it);
        if (state.expired(e)) continue;
        Candidate c;
        c.key = *it;
        c.index = out.size();
        c.raw_features = extract(e, state.now());
        c.size = e.size;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::string> lru_victims(const CacheState& state, std::uint64_t needed) {
    std::vector<std::string> victims;
    std::uint64_t freed = 0;
    const auto& recency = state.recency();
    for (auto it = recency.rbegin(); it != recency.rend() && freed < needed; ++it) {
        victims.push_back(*it);
        freed += state.entry(*it).size;
    }
    return victims;
}

std::vector<std::string> LruPolicy::select_victims(const CacheState& state,
                                                   std::uint64_t needed) {
    last_ = DecisionInfo{};
    return lru_victims(state, needed);
}

namespace {

struct Ranked {
    const std::string* key;
    std::uint64_t size;
    std::uint64_t hit_count;
    std::size_t coldness;  // 0 = coldest
};

std::vector<Ranked> ranked_residents(const CacheState& state) {
    std::vector<Ranked> v;
    v.reserve(state.resident_count());
    std::size_t coldness = 0;
    const auto& recency = state.recency();
    for (auto it = recency.rbegin(); it != recency.rend(); ++it) {
        const CacheEntry& e = state.entry(*it);
        v.push_back({&*it, e.size, e.hit_count, coldness++});
    }
    return v;
}

std::vector<std::string> take_until(const std::vector<Ranked>& order, std::uint64_t needed) {
    std::vector<std::string> victims;
    std::uint64_t freed = 0;
    for (const auto& r : order) {
        if (freed >= needed) break;
        victims.push_back(*r.key);
        freed += r.size;
    }
    return victims;
}

} // namespace

std::vector<std::string> LfuPolicy::select_victims(const CacheState& state,
                                                   std::uint64_t needed) {
    last_ = DecisionInfo{};
    auto order = ranked_residents(state);
    std::sort(order.begin(), order.end(), [](const Ranked& a, const Ranked& b) {
        if (a.hit_count != b.hit_count) return a.hit_count < b.hit_count;
        return a.coldness < b.coldness;
    });
    return take_until(order, needed);
}

std::vector<std::string> SizePolicy::select_victims(const CacheState& state,
                                                    std::uint64_t needed) {
    last_ = DecisionInfo{};
    auto order = ranked_residents(state);
    std::sort(order.begin(), order.end(), [](const Ranked& a, const Ranked& b) {
        if (a.size != b.size) return a.size > b.size;
        return a.coldness < b.coldness;
    });
    return take_until(order, needed);
}

HybridPolicy::HybridPolicy(double w) : w_(w) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("hybrid: w must be in [0, 1]");
}

std::vector<std::string> HybridPolicy::select_victims(const CacheState& state,
                                                      std::uint64_t needed) {
    last_ = DecisionInfo{};
    auto order = ranked_residents(state);
    const auto n = static_cast<double>(order.size());

    // rank_size: smallest object gets 0, largest n-1; size ties leave the
    // colder object with the higher rank so it is evicted first.
    std::vector<std::size_t> by_size(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) by_size[i] = i;
    std::sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
        if (order[a].size != order[b].size) return order[a].size < order[b].size;
        return order[a].coldness > order[b].coldness;
    });
    std::vector<double> size_rank(order.size());
    for (std::size_t r = 0; r < by_size.size(); ++r) size_rank[by_size[r]] = static_cast<double>(r);

    // rank_recency: colder = higher (coldness 0 maps to n-1).
    std::vector<double> score(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        double cold_rank = static_cast<double>(order.size() - 1 - order[i].coldness);
        score[i] = w_ * cold_rank / n + (1.0 - w_) * size_rank[i] / n;
    }

    std::vector<std::size_t> idx(order.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        if (order[a].coldness != order[b].coldness) return order[a].coldness < order[b].coldness;
        return *order[a].key < *order[b].key;
    });

    std::vector<Ranked> final_order;
    final_order.reserve(order.size());
    for (auto i : idx) final_order.push_back(order[i]);
    return take_until(final_order, needed);
}

// --- ARC -------------------------------------------------------------------

void ArcPolicy::List::push_front(const std::string& key, std::uint64_t size) {
    order.push_front(key);
    index.emplace(key, std::make_pair(order.begin(), size));
    bytes += size;
}

std::uint64_t ArcPolicy::List::erase(const std::string& key) {
    auto it = index.find(key);
    if (it == index.end()) return 0;
    std::uint64_t size = it->second.second;
    order.erase(it->second.first);
    bytes -= size;
    index.erase(it);
    return size;
}

void ArcPolicy::List::pop_back() {
    if (order.empty()) return;
    erase(order.back());
}

void ArcPolicy::on_hit(const CacheState& state, const std::string& key) {
    const std::uint64_t size = state.entry(key).size;
    if (t1_.contains(key)) {
        t1_.erase(key);
        t2_.push_front(key, size);
    } else if (t2_.contains(key)) {
        t2_.erase(key);
        t2_.push_front(key, size);
    } else {
        throw std::logic_error("arc: hit on key not tracked in T1/T2: '" + key + "'");
    }
}

void ArcPolicy::on_admit(const CacheState& state, const std::string& key) {
    const std::uint64_t size = state.entry(key).size;
    const double cap = static_cast<double>(state.capacity());
    if (b1_.contains(key)) {
        p_ = std::min(cap, p_ + static_cast<double>(size));
        b1_.erase(key);
        t2_.push_front(key, size);
    } else if (b2_.contains(key)) {
        p_ = std::max(0.0, p_ - static_cast<double>(size));
        b2_.erase(key);
        t2_.push_front(key, size);
    } else {
        t1_.push_front(key, size);
    }
    trim_ghosts(state.capacity());
}

void ArcPolicy::trim_ghosts(std::uint64_t capacity) {
    while (!b1_.order.empty() && t1_.bytes + b1_.bytes > capacity) b1_.pop_back();
    while (!b2_.order.empty() &&
           t1_.bytes + t2_.bytes + b1_.bytes + b2_.bytes > 2 * capacity)
        b2_.pop_back();
}

void ArcPolicy::on_evict(const CacheState&, const std::string& key, bool expired) {
    if (!expired) {
        // Decision victims were already moved to a ghost in select_victims.
        if (b1_.contains(key) || b2_.contains(key)) return;
    }
    if (t1_.contains(key)) { t1_.erase(key); return; }   // expired: no ghost
    if (t2_.contains(key)) { t2_.erase(key); return; }
    throw std::logic_error("arc: eviction of untracked key '" + key + "' (state desync)");
}

std::vector<std::string> ArcPolicy::select_victims(const CacheState& state,
                                                   std::uint64_t needed) {
    last_ = DecisionInfo{};
    std::vector<std::string> victims;
    std::uint64_t freed = 0;
    while (freed < needed && (!t1_.order.empty() || !t2_.order.empty())) {
        const bool from_t1 =
            !t1_.order.empty() &&
            (t2_.order.empty() ||
             static_cast<double>(t1_.bytes) >= std::max(1.0, p_));
        List& src = from_t1 ? t1_ : t2_;
        List& ghost = from_t1 ? b1_ : b2_;
        const std::string key = src.order.back();
        const std::uint64_t size = src.erase(key);
        ghost.push_front(key, size);
        victims.push_back(key);
        freed += size;
    }
    trim_ghosts(state.capacity());
    return victims;
}

std::unique_ptr<EvictionPolicy> make_classical_policy(std::string_view name) {
    if (name == "lru") return std::make_unique<LruPolicy>();
    if (name == "lfu") return std::make_unique<LfuPolicy>();
    if (name == "size") return std::make_unique<SizePolicy>();
    if (name == "arc") return std::make_unique<ArcPolicy>();
    if (name == "hybrid") return std::make_unique<HybridPolicy>();
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

} // namespace coldrl
