#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "webparf/allocator.hpp"
#include "webparf/errors.hpp"
#include "webparf/url.hpp"

namespace webparf {

// Status 0 marks a transport-level failure (timeout, refused connection);
// everything else is an HTTP-style code.
inline constexpr int kStatusTransportFailure = 0;

struct FetchResult {
  CanonicalUrl url;
  int status = kStatusTransportFailure;
  std::string body;
  std::string content_type;
  std::chrono::milliseconds elapsed{0};
};

class FetchBackend {
 public:
  virtual ~FetchBackend() = default;
  virtual FetchResult fetch(const CanonicalUrl& url) = 0;
};

// Counts backend calls per canonical URL string. The overlap metric reads
// straight off these counters.
class CountingBackend : public FetchBackend {
 public:
  explicit CountingBackend(FetchBackend& inner) : inner_(inner) {}

  FetchResult fetch(const CanonicalUrl& url) override {
    {
      std::scoped_lock lock(mutex_);
      ++counts_[render(url)];
    }
    return inner_.fetch(url);
  }

  std::map<std::string, long long> counts() const {
    std::scoped_lock lock(mutex_);
    return counts_;
  }

  long long count_of(const std::string& url) const {
    std::scoped_lock lock(mutex_);
    auto it = counts_.find(url);
    return it == counts_.end() ? 0 : it->second;
  }

  // Total fetches beyond the first, summed over URLs.
  long long overlap() const {
    std::scoped_lock lock(mutex_);
    long long extra = 0;
    for (const auto& [url, n] : counts_)
      if (n > 1) extra += n - 1;
    return extra;
  }

 private:
  FetchBackend& inner_;
  std::map<std::string, long long> counts_;
  mutable std::mutex mutex_;
};

// Spaces fetch starts per host: concurrent callers reserve slots at least
// `delay` apart, whatever thread they run on.
class PolitenessGate {
 public:
  explicit PolitenessGate(std::chrono::milliseconds delay) : delay_(delay) {}

  std::chrono::milliseconds delay() const { return delay_; }

  void acquire(const std::string& host) {
    if (delay_.count() == 0) return;
    std::chrono::steady_clock::time_point slot;
    {
      std::scoped_lock lock(mutex_);
      auto now = std::chrono::steady_clock::now();
      auto it = next_slot_.find(host);
      slot = (it == next_slot_.end()) ? now : std::max(now, it->second);
      next_slot_[host] = slot + delay_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::milliseconds delay_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
  std::mutex mutex_;
};

// Polite fetch with a single retry on transport failure or 5xx. Failures
// come back as results, never as exceptions.
inline FetchResult fetch(FetchBackend& backend, const CanonicalUrl& url, PolitenessGate& gate) {
  auto started = std::chrono::steady_clock::now();
  gate.acquire(host_of(url));
  FetchResult result = backend.fetch(url);
  if (result.status == kStatusTransportFailure || result.status >= 500) {
    gate.acquire(host_of(url));
    result = backend.fetch(url);
  }
  result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  return result;
}

// FNV-1a over the exact body bytes. 64 bits is plenty at the scales this
// repository sees, and the function is trivial to reimplement elsewhere.
inline std::uint64_t content_digest(std::string_view body) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : body) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

inline std::string digest_hex(std::uint64_t digest) {
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[digest & 0xF];
    digest >>= 4;
  }
  return out;
}

struct PageRecord {
  CanonicalUrl url;  // first URL the body was stored under
  std::string domain;
  std::uint64_t digest = 0;
  std::string body;
  int fetched_at = 0;  // round counter
};

enum class StoreOutcome { stored, duplicate };

struct StoreResult {
  StoreOutcome outcome;
  std::uint64_t digest = 0;
  CanonicalUrl existing_url;  // first holder of the body when duplicate
};

// Page repository with global content dedup: one body per digest, an index
// entry per fetched URL, and a log of alias detections. Optionally persists
// to disk as pages/<hex-digest> plus an append-only index.jsonl.
class Repository {
 public:
  struct IndexEntry {
    std::uint64_t digest = 0;
    std::string domain;
    int round = 0;
  };

  Repository() = default;

  explicit Repository(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_ / "pages");
    index_out_.open(*dir_ / "index.jsonl", std::ios::app);
  }

  StoreResult store_page(const CanonicalUrl& url, const std::string& domain, std::string body,
                         int round = 0) {
    std::uint64_t digest = content_digest(body);
    std::scoped_lock lock(mutex_);
    StoreResult result{StoreOutcome::stored, digest, {}};
    auto it = records_.find(digest);
    if (it == records_.end()) {
      if (dir_) write_body(digest, body);
      records_.emplace(digest, PageRecord{url, domain, digest, std::move(body), round});
    } else {
      result.outcome = StoreOutcome::duplicate;
      result.existing_url = it->second.url;
      duplicate_log_.emplace_back(render(url), digest);
    }
    index_[render(url)] = IndexEntry{digest, domain, round};
    if (dir_) append_index_line(render(url), digest, domain, round);
    return result;
  }

  // Classifier verdict for an already-indexed URL.
  void retag(const CanonicalUrl& url, const std::string& domain) {
    std::scoped_lock lock(mutex_);
    auto it = index_.find(render(url));
    if (it == index_.end()) throw UnknownUrlError(render(url));
    it->second.domain = domain;
    auto rec = records_.find(it->second.digest);
    if (rec != records_.end() && render(rec->second.url) == render(url))
      rec->second.domain = domain;
    if (dir_) append_index_line(render(url), it->second.digest, domain, it->second.round);
  }

  std::optional<IndexEntry> find_index(const CanonicalUrl& url) const {
    std::scoped_lock lock(mutex_);
    auto it = index_.find(render(url));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<PageRecord> find_record(std::uint64_t digest) const {
    std::scoped_lock lock(mutex_);
    auto it = records_.find(digest);
    if (it == records_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t record_count() const {
    std::scoped_lock lock(mutex_);
    return records_.size();
  }

  std::size_t index_count() const {
    std::scoped_lock lock(mutex_);
    return index_.size();
  }

  std::size_t duplicate_count() const {
    std::scoped_lock lock(mutex_);
    return duplicate_log_.size();
  }

  std::vector<std::pair<std::string, std::uint64_t>> duplicate_log() const {
    std::scoped_lock lock(mutex_);
    return duplicate_log_;
  }

  std::map<std::uint64_t, PageRecord> records() const {
    std::scoped_lock lock(mutex_);
    return records_;
  }

  std::map<std::string, IndexEntry> index() const {
    std::scoped_lock lock(mutex_);
    return index_;
  }

 private:
  void write_body(std::uint64_t digest, const std::string& body) const {
    std::ofstream out(*dir_ / "pages" / digest_hex(digest), std::ios::binary);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
  }

  void append_index_line(const std::string& url, std::uint64_t digest, const std::string& domain,
                         int round) {
    nlohmann::json line{
        {"url", url}, {"digest", digest_hex(digest)}, {"domain", domain}, {"round", round}};
    index_out_ << line.dump() << '\n';
    index_out_.flush();
  }

  std::map<std::uint64_t, PageRecord> records_;
  std::map<std::string, IndexEntry> index_;
  std::vector<std::pair<std::string, std::uint64_t>> duplicate_log_;
  mutable std::mutex mutex_;
  std::optional<std::filesystem::path> dir_;
  std::ofstream index_out_;
};

// Receives (entry, result) pairs for every successfully fetched page. Must
// tolerate concurrent calls from different workers.
using AnalyzerSink = std::function<void(const PoolEntry&, const FetchResult&)>;

struct CycleOutcome {
  CanonicalUrl url;
  int status = 0;
};

struct CycleReport {
  int fetched_ok = 0;
  int fetch_errors = 0;
  int stored = 0;
  int duplicates = 0;
  int handoffs = 0;
  bool hunger_signaled = false;
  std::vector<CycleOutcome> outcomes;
};

// One worker round: drain the inbox, fetch each entry, store successful
// bodies, hand pages to the analyzer sink, then signal hunger. All failures
// are recorded in the report, none thrown.
inline CycleReport worker_cycle(WorkerInbox& inbox, FetchBackend& backend, PolitenessGate& gate,
                                Repository& repo, const AnalyzerSink& sink, int round = 0,
                                const std::function<void()>& hunger_signal = {}) {
  CycleReport report;
  while (auto entry = inbox.pop()) {
    FetchResult result = fetch(backend, entry->url, gate);
    entry->state = EntryState::fetched;
    if (result.status == 200) {
      StoreResult stored = repo.store_page(entry->url, entry->domain, result.body, round);
      stored.outcome == StoreOutcome::stored ? ++report.stored : ++report.duplicates;
      ++report.fetched_ok;
      if (sink) {
        sink(*entry, result);
        ++report.handoffs;
      }
    } else {
      ++report.fetch_errors;
    }
    report.outcomes.push_back({entry->url, result.status});
  }
  report.hunger_signaled = true;
  if (hunger_signal) hunger_signal();
  return report;
}

}  // namespace webparf
