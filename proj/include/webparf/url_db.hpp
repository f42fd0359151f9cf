#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "webparf/errors.hpp"
#include "webparf/url.hpp"

namespace webparf {

enum class Provenance { seed, predicted, classified };
enum class UrlState { discovered, enqueued, fetched, failed };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::seed: return "seed";
    case Provenance::predicted: return "predicted";
    case Provenance::classified: return "classified";
  }
  return "?";
}

inline const char* to_string(UrlState s) {
  switch (s) {
    case UrlState::discovered: return "discovered";
    case UrlState::enqueued: return "enqueued";
    case UrlState::fetched: return "fetched";
    case UrlState::failed: return "failed";
  }
  return "?";
}

inline Provenance provenance_from_string(const std::string& s) {
  if (s == "seed") return Provenance::seed;
  if (s == "predicted") return Provenance::predicted;
  if (s == "classified") return Provenance::classified;
  throw ParseError("unknown provenance: " + s);
}

inline UrlState url_state_from_string(const std::string& s) {
  if (s == "discovered") return UrlState::discovered;
  if (s == "enqueued") return UrlState::enqueued;
  if (s == "fetched") return UrlState::fetched;
  if (s == "failed") return UrlState::failed;
  throw ParseError("unknown url state: " + s);
}

struct UrlDbEntry {
  CanonicalUrl url;
  std::string domain;
  Provenance provenance = Provenance::predicted;
  UrlState state = UrlState::discovered;
  std::optional<CanonicalUrl> source;  // page that revealed the URL
  int inlink_count = 0;
};

// The URL database: single source of truth for domain tags and lifecycle
// state of every URL the crawler has ever seen. States only move forward
// (discovered -> enqueued -> fetched | failed) and provenance only upgrades
// predicted -> classified. Optionally journals every transition to an
// append-only JSON-lines file whose replay rebuilds the database.
class UrlDatabase {
 public:
  UrlDatabase() = default;

  void attach_journal(const std::filesystem::path& path) {
    std::scoped_lock lock(mutex_);
    journal_.open(path, std::ios::app);
  }

  // Rebuilds state from an append-only journal; the last line per URL wins.
  void replay(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("journal not found: " + path.string());
    std::scoped_lock lock(mutex_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line);
      auto url = canonicalize(j.at("url").get<std::string>());
      if (!url) throw ParseError("journal contains malformed url: " + line);
      UrlDbEntry entry;
      entry.url = *url;
      entry.domain = j.at("domain").get<std::string>();
      entry.provenance = provenance_from_string(j.at("provenance").get<std::string>());
      entry.state = url_state_from_string(j.at("state").get<std::string>());
      if (j.contains("source") && !j.at("source").is_null())
        entry.source = canonicalize(j.at("source").get<std::string>());
      entries_[render(*url)] = std::move(entry);
    }
  }

  // Inserts if absent; returns false when the URL is already present.
  bool insert(UrlDbEntry entry) {
    std::scoped_lock lock(mutex_);
    auto [it, inserted] = entries_.emplace(render(entry.url), std::move(entry));
    if (inserted) journal_line(it->second);
    return inserted;
  }

  bool contains(const CanonicalUrl& url) const {
    std::scoped_lock lock(mutex_);
    return entries_.contains(render(url));
  }

  std::optional<UrlDbEntry> find(const CanonicalUrl& url) const {
    std::scoped_lock lock(mutex_);
    auto it = entries_.find(render(url));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  // Sets the domain tag. A classified tag beats a predicted one; classified
  // and seed tags, once set, are never overwritten by anything.
  void tag(const CanonicalUrl& url, const std::string& domain, Provenance provenance) {
    std::scoped_lock lock(mutex_);
    UrlDbEntry& entry = locate(url);
    if (entry.provenance == Provenance::classified || entry.provenance == Provenance::seed) return;
    if (provenance == Provenance::seed) return;  // seeds are declared, not discovered
    entry.domain = domain;
    entry.provenance = provenance;
    journal_line(entry);
  }

  void set_state(const CanonicalUrl& url, UrlState next) {
    std::scoped_lock lock(mutex_);
    UrlDbEntry& entry = locate(url);
    if (entry.state == next) return;
    bool legal = (entry.state == UrlState::discovered && next == UrlState::enqueued) ||
                 (entry.state == UrlState::enqueued &&
                  (next == UrlState::fetched || next == UrlState::failed));
    if (!legal)
      throw Error("illegal url state transition " + std::string(to_string(entry.state)) + " -> " +
                  to_string(next) + " for " + render(url));
    entry.state = next;
    journal_line(entry);
  }

  void record_inlink(const CanonicalUrl& url) {
    std::scoped_lock lock(mutex_);
    ++locate(url).inlink_count;
  }

  std::size_t size() const {
    std::scoped_lock lock(mutex_);
    return entries_.size();
  }

  std::map<std::string, UrlDbEntry> entries() const {
    std::scoped_lock lock(mutex_);
    return entries_;
  }

 private:
  UrlDbEntry& locate(const CanonicalUrl& url) {
    auto it = entries_.find(render(url));
    if (it == entries_.end()) throw UnknownUrlError(render(url));
    return it->second;
  }

  void journal_line(const UrlDbEntry& entry) {
    if (!journal_.is_open()) return;
    nlohmann::json line{{"url", render(entry.url)},
                        {"domain", entry.domain},
                        {"provenance", to_string(entry.provenance)},
                        {"state", to_string(entry.state)},
                        {"source", entry.source ? nlohmann::json(render(*entry.source))
                                                : nlohmann::json(nullptr)}};
    journal_ << line.dump() << '\n';
    journal_.flush();
  }

  std::map<std::string, UrlDbEntry> entries_;
  mutable std::mutex mutex_;
  std::ofstream journal_;
};

}  // namespace webparf
