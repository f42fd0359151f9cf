#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "webparf/errors.hpp"
#include "webparf/frontier.hpp"

namespace webparf {

using WorkerId = int;

// Bounded inbound queue of one worker. Single producer (allocator/router),
// single consumer (the owning worker); the lock covers snapshot-style reads
// from other threads.
class WorkerInbox {
 public:
  WorkerInbox(WorkerId owner, std::size_t capacity) : owner_(owner), capacity_(capacity) {}

  WorkerId owner() const { return owner_; }
  std::size_t capacity() const { return capacity_; }

  bool try_push(PoolEntry entry) {
    std::scoped_lock lock(mutex_);
    if (slots_.size() >= capacity_) return false;
    slots_.push_back(std::move(entry));
    return true;
  }

  std::optional<PoolEntry> pop() {
    std::scoped_lock lock(mutex_);
    if (slots_.empty()) return std::nullopt;
    PoolEntry entry = std::move(slots_.front());
    slots_.pop_front();
    return entry;
  }

  std::size_t size() const {
    std::scoped_lock lock(mutex_);
    return slots_.size();
  }

  bool full() const { return size() >= capacity_; }
  bool empty() const { return size() == 0; }

 private:
  WorkerId owner_;
  std::size_t capacity_;
  std::deque<PoolEntry> slots_;
  mutable std::mutex mutex_;
};

// deque: WorkerInbox holds a mutex and must never relocate.
using InboxSet = std::deque<WorkerInbox>;

// Which live worker serves which domain. The default construction spreads
// domains round-robin in sorted order, one worker per domain when counts
// match.
class Assignment {
 public:
  Assignment(std::vector<std::string> domains, int worker_count) : live_(worker_count, true) {
    if (worker_count < 1) throw InvalidParamsError("worker count must be >= 1");
    std::sort(domains.begin(), domains.end());
    int next = 0;
    for (const std::string& domain : domains) {
      owner_[domain] = next;
      next = (next + 1) % worker_count;
    }
  }

  WorkerId owner_of(const std::string& domain) const {
    auto it = owner_.find(domain);
    if (it == owner_.end()) throw UnknownDomainError(domain);
    return it->second;
  }

  void assign(const std::string& domain, WorkerId worker) { owner_[domain] = worker; }

  int worker_count() const { return static_cast<int>(live_.size()); }

  bool is_live(WorkerId w) const {
    return w >= 0 && w < worker_count() && live_[static_cast<std::size_t>(w)];
  }

  int live_count() const {
    return static_cast<int>(std::count(live_.begin(), live_.end(), true));
  }

  void mark_dead(WorkerId w) {
    if (w >= 0 && w < worker_count()) live_[static_cast<std::size_t>(w)] = false;
  }

  std::vector<std::string> domains_of(WorkerId w) const {
    std::vector<std::string> out;
    for (const auto& [domain, owner] : owner_)
      if (owner == w) out.push_back(domain);
    return out;
  }

  // Owned-domain count per live worker, zero-load workers included.
  // Domains still pointing at a dead worker (mid-rebalance) are not counted.
  std::map<WorkerId, int> live_loads() const {
    std::map<WorkerId, int> loads;
    for (WorkerId w = 0; w < worker_count(); ++w)
      if (is_live(w)) loads[w] = 0;
    for (const auto& [domain, owner] : owner_) {
      auto it = loads.find(owner);
      if (it != loads.end()) ++it->second;
    }
    return loads;
  }

  // max - min owned domains across live workers.
  int spread() const {
    auto loads = live_loads();
    if (loads.empty()) return 0;
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (const auto& [w, n] : loads) {
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    return hi - lo;
  }

  const std::map<std::string, WorkerId>& mapping() const { return owner_; }

 private:
  std::map<std::string, WorkerId> owner_;
  std::vector<bool> live_;
};

// One allocation pass: for every domain whose queue is non-empty and whose
// owner's inbox has room, move exactly one entry from the frontier into that
// inbox. Domains with empty queues or full inboxes are skipped without
// touching the frontier. `max_deliveries` caps the pass (used to honor page
// budgets); the cap is applied in sorted domain order.
inline std::map<WorkerId, std::vector<PoolEntry>> allocate_round(
    GlobalFrontier& frontier, const Assignment& assignment, InboxSet& inboxes,
    std::size_t max_deliveries = std::numeric_limits<std::size_t>::max()) {
  std::map<WorkerId, std::vector<PoolEntry>> delivered;
  std::size_t count = 0;
  for (const auto& [domain, owner] : assignment.mapping()) {
    if (count >= max_deliveries) break;
    WorkerInbox& inbox = inboxes.at(static_cast<std::size_t>(owner));
    if (inbox.full()) continue;
    auto entry = frontier.dequeue(domain);
    if (!entry) continue;
    if (!inbox.try_push(*entry)) {
      // lost the capacity between the check and the push; no entry may drop
      frontier.requeue(domain, std::move(*entry));
      continue;
    }
    delivered[owner].push_back(std::move(*entry));
    ++count;
  }
  return delivered;
}

enum class RouteOutcome { delivered, deferred };

// Hands an in-flight entry to the worker owning `target_domain`. When that
// inbox is full the entry goes back to the frontier at its existing score
// instead of blocking; it was already admitted once, so the dedup set is
// not consulted.
inline RouteOutcome route(PoolEntry entry, const std::string& target_domain,
                          const Assignment& assignment, InboxSet& inboxes,
                          GlobalFrontier& frontier) {
  WorkerId owner = assignment.owner_of(target_domain);
  entry.domain = target_domain;
  if (inboxes.at(static_cast<std::size_t>(owner)).try_push(entry)) return RouteOutcome::delivered;
  frontier.requeue(target_domain, std::move(entry));
  return RouteOutcome::deferred;
}

struct RebalanceReport {
  bool changed = false;
  std::vector<std::pair<std::string, WorkerId>> reassigned;
  int rerouted_delivered = 0;
  int rerouted_deferred = 0;
};

// Marks a worker dead, hands each of its domains to the live worker owning
// the fewest domains (ties to the lowest id, loads recomputed after every
// reassignment), then evacuates its inbox through route(). Killing an
// already-dead worker is a no-op; killing the last live worker raises
// NoSurvivors.
inline RebalanceReport rebalance_on_failure(WorkerId failed, Assignment& assignment,
                                            InboxSet& inboxes, GlobalFrontier& frontier) {
  RebalanceReport report;
  if (!assignment.is_live(failed)) return report;
  if (assignment.live_count() <= 1) throw NoSurvivorsError();

  assignment.mark_dead(failed);
  report.changed = true;

  for (const std::string& domain : assignment.domains_of(failed)) {
    auto loads = assignment.live_loads();
    WorkerId target = loads.begin()->first;
    for (const auto& [w, n] : loads)
      if (n < loads.at(target)) target = w;
    assignment.assign(domain, target);
    report.reassigned.emplace_back(domain, target);
  }

  WorkerInbox& dead_inbox = inboxes.at(static_cast<std::size_t>(failed));
  while (auto entry = dead_inbox.pop()) {
    std::string domain = entry->domain;
    if (route(std::move(*entry), domain, assignment, inboxes, frontier) == RouteOutcome::delivered)
      ++report.rerouted_delivered;
    else
      ++report.rerouted_deferred;
  }
  return report;
}

}  // namespace webparf
