#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "webparf/analyzer.hpp"
#include "webparf/frontier.hpp"
#include "webparf/url.hpp"
#include "webparf/url_db.hpp"

namespace webparf {

struct FlushReport {
  int flushed = 0;
  int rejected_duplicate = 0;
};

struct DispatcherStats {
  long long discoveries = 0;          // URLs admitted into the database
  long long malformed = 0;            // hrefs that failed resolution
  long long duplicate_sightings = 0;  // hrefs pointing at known URLs
  long long flush_events = 0;         // non-empty flushes into the frontier
};

// Splits a host+path string on '/', '.', '-', '_' and digits, lowercased.
// Used for keyword matching against URL text.
inline std::vector<std::string> url_tokens(const CanonicalUrl& url) {
  std::string text = url.host + url.path;
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    bool separator = c == '/' || c == '.' || c == '-' || c == '_' ||
                     std::isdigit(static_cast<unsigned char>(c)) != 0;
    if (!separator) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// The URL dispatcher: absolutizes discovered hrefs, predicts their domains,
// filters duplicates against the URL database and the frontier, and flushes
// admissions to the frontier in batches of `trigger_size` (plus one flush at
// end of cycle).
class Dispatcher {
 public:
  Dispatcher(UrlDatabase& db, GlobalFrontier& frontier, std::vector<DomainProfile> profiles,
             ScoreWeights weights, std::size_t trigger_size)
      : db_(db),
        frontier_(frontier),
        profiles_(std::move(profiles)),
        weights_(weights),
        trigger_size_(trigger_size == 0 ? 1 : trigger_size) {}

  // Processes one page's link set under the page's (classified) domain.
  // Returns the number of new URLs admitted to the pending batch.
  int process_links(const LinkSet& links, const std::string& src_domain) {
    int admitted = 0;
    for (const RawHref& href : links.hrefs) {
      auto url = resolve(links.base, href);
      if (!url) {
        ++stats_.malformed;
        continue;
      }
      if (db_.contains(*url)) {
        db_.record_inlink(*url);
        if (frontier_.contains(*url)) frontier_.record_inlink(*url);
        ++stats_.duplicate_sightings;
        continue;
      }
      UrlDbEntry candidate;
      candidate.url = *url;
      candidate.domain = predict_domain(*url, src_domain);
      candidate.provenance = Provenance::predicted;
      candidate.state = UrlState::discovered;
      candidate.source = links.base;
      candidate.inlink_count = 1;  // the revealing page links here
      admitted += static_cast<int>(filter_new({std::move(candidate)}).size());
    }
    return admitted;
  }

  // Domain prediction, first rule that applies wins:
  //   1. an existing database tag,
  //   2. keyword hits in the URL's own host/path tokens (most hits wins,
  //      ties to the lexicographically smallest domain),
  //   3. the domain of the page the URL was found on.
  std::string predict_domain(const CanonicalUrl& url, const std::string& src_domain) const {
    if (auto existing = db_.find(url)) return existing->domain;

    std::vector<std::string> tokens = url_tokens(url);
    std::map<std::string, int> hits;
    for (const std::string& token : tokens)
      for (const DomainProfile& profile : profiles_)
        if (profile.keywords.contains(token)) ++hits[profile.name];
    std::string best;
    int best_hits = 0;
    for (const auto& [name, count] : hits) {
      if (count > best_hits) {
        best_hits = count;
        best = name;
      }
    }
    if (best_hits > 0) return best;

    return src_domain;
  }

  // Admission gate: keeps only URLs absent from both the database and the
  // frontier's seen set, recording each survivor as a discovered entry.
  // Insert-if-absent is atomic per URL, so one of two racing discoveries
  // loses.
  std::vector<UrlDbEntry> filter_new(std::vector<UrlDbEntry> candidates) {
    std::vector<UrlDbEntry> admitted;
    for (UrlDbEntry& candidate : candidates) {
      if (frontier_.contains(candidate.url)) continue;
      UrlDbEntry copy = candidate;
      if (!db_.insert(std::move(candidate))) continue;
      batch_.push_back(copy.url);
      ++stats_.discoveries;
      admitted.push_back(std::move(copy));
      if (batch_.size() >= trigger_size_) flush_batch();
    }
    return admitted;
  }

  // Scores and enqueues everything pending. Called automatically when the
  // batch reaches trigger size and by the engine at end of cycle.
  FlushReport flush_batch() {
    FlushReport report;
    if (batch_.empty()) return report;
    ++stats_.flush_events;
    for (const CanonicalUrl& url : batch_) {
      auto entry = db_.find(url);
      if (!entry) continue;
      int score = relevance_score(entry->inlink_count, 0, weights_);
      auto outcome = frontier_.enqueue(entry->domain, url, score, entry->inlink_count, 0);
      if (outcome == EnqueueResult::admitted) {
        db_.set_state(url, UrlState::enqueued);
        ++report.flushed;
      } else {
        ++report.rejected_duplicate;
      }
    }
    batch_.clear();
    return report;
  }

  std::size_t pending_size() const { return batch_.size(); }
  std::size_t trigger_size() const { return trigger_size_; }
  const DispatcherStats& stats() const { return stats_; }

 private:
  UrlDatabase& db_;
  GlobalFrontier& frontier_;
  std::vector<DomainProfile> profiles_;
  ScoreWeights weights_;
  std::size_t trigger_size_;
  std::vector<CanonicalUrl> batch_;  // discovery order
  DispatcherStats stats_;
};

}  // namespace webparf
