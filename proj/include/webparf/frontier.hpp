#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "webparf/errors.hpp"
#include "webparf/url.hpp"

namespace webparf {

// Reserved catch-all domain. Always registered, empty keyword set.
inline constexpr const char* kUnclassified = "unclassified";

// A topical domain: keyword profile plus starting points.
struct DomainProfile {
  std::string name;
  std::set<std::string> keywords;
  std::vector<CanonicalUrl> seeds;
};

struct ScoreWeights {
  double alpha = 1.0;  // weight of inlink count
  double beta = 0.5;   // weight of request count
};

// floor(alpha*inlinks + beta*requests). Integer buckets keep equal-score
// URLs grouped in FIFO lists.
inline int relevance_score(int inlinks, int requests, const ScoreWeights& w) {
  return static_cast<int>(std::floor(w.alpha * inlinks + w.beta * requests));
}

enum class EntryState { pending, issued, fetched };

struct PoolEntry {
  CanonicalUrl url;
  std::string domain;
  int inlink_count = 0;
  int request_count = 0;
  int score = 0;
  EntryState state = EntryState::pending;
};

struct UrlCounters {
  int inlinks = 0;
  int requests = 0;
};

// Read-only view of one score node: rank position, score, FIFO of urls.
struct QueueNode {
  int position = 0;
  int score = 0;
  std::vector<std::string> urls;
};

enum class EnqueueResult { admitted, rejected_duplicate };

// The Global URL Frontier: one prioritized queue per domain plus the global
// set of canonical URL strings ever admitted. A URL enters the frontier at
// most once in its lifetime; later sightings only touch counters.
//
// Thread safety: admission and counter updates are linearizable under one
// lock; each domain queue has its own lock so dequeues on distinct domains
// proceed concurrently.
class GlobalFrontier {
 public:
  GlobalFrontier() {
    pools_.emplace(kUnclassified, std::make_unique<DomainQueue>());
  }

  void create_pool(const DomainProfile& profile, const ScoreWeights& weights) {
    {
      std::scoped_lock lock(pools_mutex_);
      if (pools_.contains(profile.name)) throw DuplicateDomainError(profile.name);
      pools_.emplace(profile.name, std::make_unique<DomainQueue>());
    }
    for (const CanonicalUrl& seed : profile.seeds)
      enqueue(profile.name, seed, relevance_score(0, 0, weights));
  }

  EnqueueResult enqueue(const std::string& domain, const CanonicalUrl& url, int score,
                        int inlink_count = 0, int request_count = 0) {
    DomainQueue& pool = find_pool(domain);
    std::string key = render(url);
    {
      std::scoped_lock lock(seen_mutex_);
      if (!seen_.insert(key).second) return EnqueueResult::rejected_duplicate;
      stats_.emplace(std::move(key), UrlCounters{inlink_count, request_count});
    }
    PoolEntry entry{url, domain, inlink_count, request_count, score, EntryState::pending};
    std::scoped_lock lock(pool.mutex);
    pool.buckets[score].push_back(std::move(entry));
    return EnqueueResult::admitted;
  }

  // Puts an already-admitted entry back at the tail of its score node.
  // The dedup set is not consulted: the entry never left `seen`.
  void requeue(const std::string& domain, PoolEntry entry) {
    DomainQueue& pool = find_pool(domain);
    entry.state = EntryState::pending;
    std::scoped_lock lock(pool.mutex);
    pool.buckets[entry.score].push_back(std::move(entry));
  }

  std::optional<PoolEntry> dequeue(const std::string& domain) {
    DomainQueue& pool = find_pool(domain);
    std::scoped_lock lock(pool.mutex);
    if (pool.buckets.empty()) return std::nullopt;
    auto head = pool.buckets.begin();
    PoolEntry entry = std::move(head->second.front());
    head->second.pop_front();
    if (head->second.empty()) pool.buckets.erase(head);
    entry.state = EntryState::issued;
    return entry;
  }

  void record_inlink(const CanonicalUrl& url) { bump(url, &UrlCounters::inlinks); }
  void record_request(const CanonicalUrl& url) { bump(url, &UrlCounters::requests); }

  UrlCounters counters(const CanonicalUrl& url) const {
    std::scoped_lock lock(seen_mutex_);
    auto it = stats_.find(render(url));
    if (it == stats_.end()) throw UnknownUrlError(render(url));
    return it->second;
  }

  bool contains(const CanonicalUrl& url) const {
    std::scoped_lock lock(seen_mutex_);
    return seen_.contains(render(url));
  }

  std::vector<QueueNode> snapshot(const std::string& domain) const {
    const DomainQueue& pool = find_pool(domain);
    std::scoped_lock lock(pool.mutex);
    std::vector<QueueNode> nodes;
    int position = 1;
    for (const auto& [score, fifo] : pool.buckets) {
      QueueNode node{position++, score, {}};
      for (const PoolEntry& entry : fifo) node.urls.push_back(render(entry.url));
      nodes.push_back(std::move(node));
    }
    return nodes;
  }

  std::size_t queue_size(const std::string& domain) const {
    const DomainQueue& pool = find_pool(domain);
    std::scoped_lock lock(pool.mutex);
    std::size_t n = 0;
    for (const auto& [score, fifo] : pool.buckets) n += fifo.size();
    return n;
  }

  bool has_domain(const std::string& domain) const {
    std::scoped_lock lock(pools_mutex_);
    return pools_.contains(domain);
  }

  // Registered domain names in sorted order.
  std::vector<std::string> domains() const {
    std::scoped_lock lock(pools_mutex_);
    std::vector<std::string> names;
    names.reserve(pools_.size());
    for (const auto& [name, pool] : pools_) names.push_back(name);
    return names;
  }

  std::size_t total_queued() const {
    std::size_t n = 0;
    for (const std::string& d : domains()) n += queue_size(d);
    return n;
  }

  std::size_t seen_count() const {
    std::scoped_lock lock(seen_mutex_);
    return seen_.size();
  }

 private:
  struct DomainQueue {
    // Descending score order; FIFO within a node; empty nodes erased.
    std::map<int, std::deque<PoolEntry>, std::greater<int>> buckets;
    mutable std::mutex mutex;
  };

  DomainQueue& find_pool(const std::string& domain) const {
    std::scoped_lock lock(pools_mutex_);
    auto it = pools_.find(domain);
    if (it == pools_.end()) throw UnknownDomainError(domain);
    return *it->second;
  }

  void bump(const CanonicalUrl& url, int UrlCounters::* field) {
    std::scoped_lock lock(seen_mutex_);
    auto it = stats_.find(render(url));
    if (it == stats_.end()) throw UnknownUrlError(render(url));
    ++(it->second.*field);
  }

  std::map<std::string, std::unique_ptr<DomainQueue>> pools_;
  std::unordered_set<std::string> seen_;
  std::unordered_map<std::string, UrlCounters> stats_;
  mutable std::mutex pools_mutex_;
  mutable std::mutex seen_mutex_;
};

}  // namespace webparf
