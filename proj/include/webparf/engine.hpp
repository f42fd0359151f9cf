#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "webparf/allocator.hpp"
#include "webparf/analyzer.hpp"
#include "webparf/dispatcher.hpp"
#include "webparf/errors.hpp"
#include "webparf/fetcher.hpp"
#include "webparf/frontier.hpp"
#include "webparf/simweb.hpp"
#include "webparf/url.hpp"
#include "webparf/url_db.hpp"

namespace webparf {

enum class BackendMode { sim, live };

struct KillSpec {
  int worker = 0;
  int round = 1;
};

struct Config {
  std::vector<DomainProfile> domains;
  int workers = 0;  // resolved default: one per configured domain
  int inbox_capacity = 16;
  int batch_size = 64;
  ScoreWeights weights;
  int politeness_ms = -1;  // resolved default: 0 for sim, 500 for live
  std::optional<long long> max_pages;
  std::optional<long long> max_rounds;
  BackendMode backend = BackendMode::sim;
  std::optional<GraphParams> graph;        // sim: generate in place
  std::optional<std::string> graph_file;   // sim: load a dumped web
  std::optional<KillSpec> kill_worker;
  std::optional<std::string> output_dir;   // live persistence root
};

struct CrawlReport {
  std::map<std::string, long long> per_domain_fetched;
  long long url_overlap = 0;
  long long content_duplicates = 0;
  std::map<std::string, long long> frontier_residue;
  long long flush_events = 0;
  long long discoveries = 0;
  long long malformed_urls = 0;
  long long duplicate_sightings = 0;
  long long routed_delivered = 0;
  long long routed_deferred = 0;
  long long rebalance_events = 0;
  std::optional<long long> post_rebalance_spread;
  std::optional<long long> misclassified;  // sim only
  std::optional<double> coverage;          // sim only
  long long fetch_attempts = 0;
  long long pages_downloaded = 0;
  long long fetch_errors = 0;
  long long stored_pages = 0;
  long long total_rounds = 0;
  std::string stop_reason;
  std::map<std::string, long long> worker_domains;  // live workers only
  long long wall_time_ms = 0;
};

inline nlohmann::json report_json(const CrawlReport& r) {
  nlohmann::json j{{"per_domain_fetched", r.per_domain_fetched},
                   {"url_overlap", r.url_overlap},
                   {"content_duplicates", r.content_duplicates},
                   {"frontier_residue", r.frontier_residue},
                   {"flush_events", r.flush_events},
                   {"discoveries", r.discoveries},
                   {"malformed_urls", r.malformed_urls},
                   {"duplicate_sightings", r.duplicate_sightings},
                   {"routed_delivered", r.routed_delivered},
                   {"routed_deferred", r.routed_deferred},
                   {"rebalance_events", r.rebalance_events},
                   {"fetch_attempts", r.fetch_attempts},
                   {"pages_downloaded", r.pages_downloaded},
                   {"fetch_errors", r.fetch_errors},
                   {"stored_pages", r.stored_pages},
                   {"total_rounds", r.total_rounds},
                   {"stop_reason", r.stop_reason},
                   {"worker_domains", r.worker_domains},
                   {"wall_time_ms", r.wall_time_ms}};
  if (r.post_rebalance_spread) j["post_rebalance_spread"] = *r.post_rebalance_spread;
  if (r.misclassified) j["misclassified"] = *r.misclassified;
  if (r.coverage) j["coverage"] = *r.coverage;
  return j;
}

namespace detail {

inline void ensure_fields(const nlohmann::json& j,
                          std::initializer_list<const char*> allowed,
                          const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* name : allowed)
      if (it.key() == name) known = true;
    if (!known) throw ParseError("unknown field '" + it.key() + "' in " + context);
  }
}

inline GraphParams graph_params_from_json(const nlohmann::json& j) {
  ensure_fields(j,
                {"domains", "pages_per_domain", "intra_links", "cross_links", "keyword_freq",
                 "noise_ratio", "alias_fraction", "rng_seed"},
                "graph params");
  GraphParams params;
  if (j.contains("domains")) {
    for (const auto& d : j.at("domains")) {
      ensure_fields(d, {"name", "keywords"}, "graph domain");
      DomainProfile profile;
      profile.name = d.at("name").get<std::string>();
      for (const auto& k : d.at("keywords")) profile.keywords.insert(k.get<std::string>());
      params.domains.push_back(std::move(profile));
    }
  }
  params.pages_per_domain = j.value("pages_per_domain", 10);
  params.intra_links = j.value("intra_links", 1);
  params.cross_links = j.value("cross_links", 0);
  params.keyword_freq = j.value("keyword_freq", 3);
  params.noise_ratio = j.value("noise_ratio", 0.0);
  params.alias_fraction = j.value("alias_fraction", 0.0);
  params.rng_seed = j.value("rng_seed", std::uint64_t{0});
  return params;
}

inline bool lowercase_token(const std::string& s) {
  for (char c : s)
    if (std::isupper(static_cast<unsigned char>(c))) return false;
  return !s.empty();
}

}  // namespace detail

inline Config config_from_json(const nlohmann::json& j) {
  detail::ensure_fields(j,
                        {"domains", "workers", "inbox_capacity", "batch_size", "score_weights",
                         "politeness_ms", "max_pages", "max_rounds", "backend", "kill_worker",
                         "output_dir"},
                        "config");
  Config config;

  if (!j.contains("domains") || !j.at("domains").is_array() || j.at("domains").empty())
    throw InvariantViolation("config needs at least one domain");
  std::set<std::string> names;
  for (const auto& d : j.at("domains")) {
    detail::ensure_fields(d, {"name", "keywords", "seeds"}, "domain");
    DomainProfile profile;
    profile.name = d.at("name").get<std::string>();
    if (!detail::lowercase_token(profile.name))
      throw InvariantViolation("domain name must be a lowercase token: " + profile.name);
    if (profile.name == kUnclassified)
      throw InvariantViolation("domain name 'unclassified' is reserved");
    if (!names.insert(profile.name).second)
      throw InvariantViolation("duplicate domain name: " + profile.name);
    if (!d.contains("keywords") || d.at("keywords").empty())
      throw InvariantViolation("domain " + profile.name + " needs a non-empty keyword list");
    for (const auto& k : d.at("keywords")) {
      std::string keyword = k.get<std::string>();
      if (!detail::lowercase_token(keyword))
        throw InvariantViolation("keyword must be a lowercase token: " + keyword);
      profile.keywords.insert(std::move(keyword));
    }
    if (d.contains("seeds")) {
      for (const auto& s : d.at("seeds")) {
        auto url = canonicalize(s.get<std::string>());
        if (!url)
          throw InvariantViolation("malformed seed url '" + s.get<std::string>() +
                                   "' in domain " + profile.name);
        profile.seeds.push_back(std::move(*url));
      }
    }
    config.domains.push_back(std::move(profile));
  }

  config.workers = static_cast<int>(config.domains.size());
  if (j.contains("workers")) config.workers = j.at("workers").get<int>();
  if (config.workers < 1) throw InvariantViolation("workers must be >= 1");

  config.inbox_capacity = j.value("inbox_capacity", 16);
  if (config.inbox_capacity < 1) throw InvariantViolation("inbox_capacity must be >= 1");

  config.batch_size = j.value("batch_size", 64);
  if (config.batch_size < 1) throw InvariantViolation("batch_size must be >= 1");

  if (j.contains("score_weights")) {
    const auto& w = j.at("score_weights");
    detail::ensure_fields(w, {"alpha", "beta"}, "score_weights");
    config.weights.alpha = w.value("alpha", 1.0);
    config.weights.beta = w.value("beta", 0.5);
    if (config.weights.alpha < 0 || config.weights.beta < 0)
      throw InvariantViolation("score weights must be >= 0");
  }

  if (j.contains("politeness_ms")) {
    config.politeness_ms = j.at("politeness_ms").get<int>();
    if (config.politeness_ms < 0) throw InvariantViolation("politeness_ms must be >= 0");
  }

  if (j.contains("max_pages") && !j.at("max_pages").is_null()) {
    config.max_pages = j.at("max_pages").get<long long>();
    if (*config.max_pages < 1) throw InvariantViolation("max_pages must be >= 1");
  }
  if (j.contains("max_rounds") && !j.at("max_rounds").is_null()) {
    config.max_rounds = j.at("max_rounds").get<long long>();
    if (*config.max_rounds < 1) throw InvariantViolation("max_rounds must be >= 1");
  }

  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    detail::ensure_fields(b, {"mode", "graph", "graph_file"}, "backend");
    std::string mode = b.value("mode", "sim");
    if (mode == "sim")
      config.backend = BackendMode::sim;
    else if (mode == "live")
      config.backend = BackendMode::live;
    else
      throw InvariantViolation("backend mode must be 'sim' or 'live'");
    if (b.contains("graph") && b.contains("graph_file"))
      throw InvariantViolation("backend takes either graph or graph_file, not both");
    if (config.backend == BackendMode::live && (b.contains("graph") || b.contains("graph_file")))
      throw InvariantViolation("graph settings are only valid for the sim backend");
    if (b.contains("graph")) {
      GraphParams params = detail::graph_params_from_json(b.at("graph"));
      if (!params.domains.empty())
        throw InvariantViolation("graph domains come from the config's domain list");
      params.domains = config.domains;
      config.graph = std::move(params);
    }
    if (b.contains("graph_file")) config.graph_file = b.at("graph_file").get<std::string>();
  }

  if (j.contains("kill_worker") && !j.at("kill_worker").is_null()) {
    const auto& k = j.at("kill_worker");
    detail::ensure_fields(k, {"worker", "round"}, "kill_worker");
    KillSpec kill;
    kill.worker = k.at("worker").get<int>();
    kill.round = k.at("round").get<int>();
    if (kill.worker < 0 || kill.worker >= config.workers)
      throw InvariantViolation("kill_worker.worker must name a configured worker");
    if (kill.round < 1) throw InvariantViolation("kill_worker.round must be >= 1");
    if (config.workers < 2)
      throw InvariantViolation("kill_worker needs at least two workers");
    config.kill_worker = kill;
  }

  if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();

  if (config.backend == BackendMode::live && !config.max_pages && !config.max_rounds)
    throw InvariantViolation("live crawls need max_pages or max_rounds as a stopping rule");

  return config;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
}

// Wires the whole pipeline and owns the round loop:
// allocate -> fetch (workers in parallel) -> analyze -> dispatch -> repeat,
// until the frontier drains or a configured limit fires. Workers only share
// linearizable structures, and per-round results are merged in worker-id
// order, so sim runs are bit-reproducible for a fixed config.
class CrawlEngine {
 public:
  explicit CrawlEngine(Config config, FetchBackend* live_backend = nullptr)
      : config_(std::move(config)), live_backend_(live_backend) {
    if (config_.domains.empty()) throw InvariantViolation("at least one domain is required");
    if (config_.workers < 1) config_.workers = static_cast<int>(config_.domains.size());
    if (config_.backend == BackendMode::sim) {
      if (config_.graph) {
        web_ = generate(*config_.graph);
      } else if (config_.graph_file) {
        std::ifstream in(*config_.graph_file);
        if (!in) throw ConfigError("graph file not found: " + *config_.graph_file);
        web_ = SyntheticWeb::from_json(nlohmann::json::parse(in));
        validate_web_domains();
      } else {
        web_ = SyntheticWeb{};  // empty web: every fetch 404s
      }
      sim_backend_ = std::make_unique<SimWebBackend>(*web_);
    }

    if (config_.output_dir) {
      std::filesystem::create_directories(*config_.output_dir);
      repo_ = std::make_unique<Repository>(*config_.output_dir);
      db_.attach_journal(std::filesystem::path(*config_.output_dir) / "urldb.jsonl");
    } else {
      repo_ = std::make_unique<Repository>();
    }

    int politeness = config_.politeness_ms;
    if (politeness < 0) politeness = config_.backend == BackendMode::sim ? 0 : 500;
    gate_ = std::make_unique<PolitenessGate>(std::chrono::milliseconds(politeness));

    register_domains();

    dispatcher_ = std::make_unique<Dispatcher>(db_, frontier_, config_.domains, config_.weights,
                                               static_cast<std::size_t>(config_.batch_size));
    assignment_.emplace(frontier_.domains(), config_.workers);
    for (WorkerId w = 0; w < config_.workers; ++w)
      inboxes_.emplace_back(w, static_cast<std::size_t>(config_.inbox_capacity));
  }

  CrawlReport run() {
    FetchBackend* inner = sim_backend_.get();
    if (config_.backend == BackendMode::live) {
      if (!live_backend_) throw ConfigError("live mode requires an HTTP backend");
      inner = live_backend_;
    }
    backend_ = std::make_unique<CountingBackend>(*inner);

    auto started = std::chrono::steady_clock::now();
    std::optional<KillSpec> kill = config_.kill_worker;
    long long round = 0;

    while (true) {
      ++round;
      if (config_.max_rounds && round > *config_.max_rounds) {
        --round;
        stop_reason_ = "max-rounds";
        break;
      }
      if (kill && kill->round == round) {
        RebalanceReport rb = rebalance_on_failure(kill->worker, *assignment_, inboxes_, frontier_);
        if (rb.changed) {
          ++rebalance_events_;
          post_rebalance_spread_ = assignment_->spread();
          routed_delivered_ += rb.rerouted_delivered;
          routed_deferred_ += rb.rerouted_deferred;
        }
        kill.reset();
      }

      std::size_t budget = std::numeric_limits<std::size_t>::max();
      if (config_.max_pages) {
        long long remaining = *config_.max_pages - pages_downloaded_;
        if (remaining <= 0) {
          --round;
          stop_reason_ = "max-pages";
          break;
        }
        budget = static_cast<std::size_t>(remaining);
      }

      auto deliveries = allocate_round(frontier_, *assignment_, inboxes_, budget);
      std::size_t delivered = 0;
      for (const auto& [worker, entries] : deliveries) {
        delivered += entries.size();
        for (const PoolEntry& entry : entries) frontier_.record_request(entry.url);
      }
      if (delivered == 0) {
        --round;
        stop_reason_ = frontier_.total_queued() == 0 ? "frontier-exhausted" : "stalled";
        break;
      }

      run_workers(static_cast<int>(round));
      dispatcher_->flush_batch();  // end of cycle
    }

    total_rounds_ = round;
    wall_time_ms_ = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    return compute_metrics();
  }

  CrawlReport compute_metrics() const {
    CrawlReport report;
    for (const std::string& domain : frontier_.domains()) {
      auto it = per_domain_fetched_.find(domain);
      report.per_domain_fetched[domain] = it == per_domain_fetched_.end() ? 0 : it->second;
      report.frontier_residue[domain] =
          static_cast<long long>(frontier_.queue_size(domain));
    }
    report.url_overlap = backend_ ? backend_->overlap() : 0;
    report.content_duplicates = static_cast<long long>(repo_->duplicate_count());
    report.flush_events = dispatcher_->stats().flush_events;
    report.discoveries = dispatcher_->stats().discoveries;
    report.malformed_urls = dispatcher_->stats().malformed;
    report.duplicate_sightings = dispatcher_->stats().duplicate_sightings;
    report.routed_delivered = routed_delivered_;
    report.routed_deferred = routed_deferred_;
    report.rebalance_events = rebalance_events_;
    if (rebalance_events_ > 0) report.post_rebalance_spread = post_rebalance_spread_;
    report.fetch_attempts = fetch_attempts_;
    report.pages_downloaded = pages_downloaded_;
    report.fetch_errors = fetch_errors_;
    report.stored_pages = static_cast<long long>(repo_->record_count());
    report.total_rounds = total_rounds_;
    report.stop_reason = stop_reason_;
    for (const auto& [worker, load] : assignment_->live_loads())
      report.worker_domains[std::to_string(worker)] = load;
    report.wall_time_ms = wall_time_ms_;

    if (web_) {
      const GroundTruth& truth = web_->truth();
      long long misclassified = 0;
      std::set<std::string> covered;
      for (const auto& [url, entry] : repo_->index()) {
        std::string primary = url;
        if (auto alias = truth.aliases.find(url); alias != truth.aliases.end())
          primary = alias->second;
        auto page = web_->pages().find(primary);
        if (page == web_->pages().end()) continue;
        if (entry.domain != page->second.true_domain) ++misclassified;
        if (truth.reachable.contains(primary)) covered.insert(primary);
      }
      report.misclassified = misclassified;
      report.coverage = truth.reachable.empty()
                            ? 1.0
                            : static_cast<double>(covered.size()) /
                                  static_cast<double>(truth.reachable.size());
    }
    return report;
  }

  const GlobalFrontier& frontier() const { return frontier_; }
  const Repository& repository() const { return *repo_; }
  const UrlDatabase& url_db() const { return db_; }
  const Assignment& assignment() const { return *assignment_; }
  const SyntheticWeb* web() const { return web_ ? &*web_ : nullptr; }
  std::map<std::string, long long> backend_counts() const {
    return backend_ ? backend_->counts() : std::map<std::string, long long>{};
  }

 private:
  void validate_web_domains() const {
    std::set<std::string> configured;
    for (const DomainProfile& profile : config_.domains) configured.insert(profile.name);
    for (const auto& [url, page] : web_->pages())
      if (!configured.contains(page.true_domain))
        throw InvariantViolation("graph file domain '" + page.true_domain +
                                 "' is not in the config");
  }

  void register_domains() {
    for (const DomainProfile& configured : config_.domains) {
      DomainProfile profile = configured;
      if (web_) {
        for (const std::string& seed : web_->seeds()) {
          auto url = canonicalize(seed);
          auto page = web_->pages().find(seed);
          if (url && page != web_->pages().end() && page->second.true_domain == profile.name)
            profile.seeds.push_back(*url);
        }
      }
      frontier_.create_pool(profile, config_.weights);
      for (const CanonicalUrl& seed : profile.seeds) {
        UrlDbEntry entry;
        entry.url = seed;
        entry.domain = profile.name;
        entry.provenance = Provenance::seed;
        entry.state = UrlState::enqueued;
        db_.insert(std::move(entry));
      }
    }
  }

  void run_workers(int round) {
    const int worker_count = config_.workers;
    std::vector<std::vector<std::pair<PoolEntry, FetchResult>>> fetched(
        static_cast<std::size_t>(worker_count));
    std::vector<CycleReport> reports(static_cast<std::size_t>(worker_count));

    std::vector<std::thread> threads;
    for (WorkerId w = 0; w < worker_count; ++w) {
      if (!assignment_->is_live(w)) continue;
      threads.emplace_back([this, w, round, &fetched, &reports] {
        auto& out = fetched[static_cast<std::size_t>(w)];
        AnalyzerSink sink = [&out](const PoolEntry& entry, const FetchResult& result) {
          out.emplace_back(entry, result);
        };
        reports[static_cast<std::size_t>(w)] = worker_cycle(
            inboxes_[static_cast<std::size_t>(w)], *backend_, *gate_, *repo_, sink, round);
      });
    }
    for (std::thread& t : threads) t.join();

    for (WorkerId w = 0; w < worker_count; ++w) {
      const CycleReport& report = reports[static_cast<std::size_t>(w)];
      fetch_attempts_ += static_cast<long long>(report.outcomes.size());
      fetch_errors_ += report.fetch_errors;
      for (const CycleOutcome& outcome : report.outcomes)
        if (outcome.status != 200) db_.set_state(outcome.url, UrlState::failed);

      for (const auto& [entry, result] : fetched[static_cast<std::size_t>(w)]) {
        ++pages_downloaded_;
        // non-HTML bodies are stored but never parsed
        bool parseable = result.content_type.empty() ||
                         result.content_type.rfind("text/html", 0) == 0;
        if (!parseable) {
          db_.set_state(entry.url, UrlState::fetched);
          ++per_domain_fetched_[entry.domain];
          continue;
        }
        ClassificationResult cls = classify(extract_text(result.body), config_.domains);
        repo_->retag(entry.url, cls.winner);
        tag_url(db_, entry.url, cls.winner);
        db_.set_state(entry.url, UrlState::fetched);
        ++per_domain_fetched_[cls.winner];
        dispatcher_->process_links(extract_links(result.body, entry.url), cls.winner);
      }
    }
  }

  Config config_;
  FetchBackend* live_backend_ = nullptr;
  std::optional<SyntheticWeb> web_;
  std::unique_ptr<SimWebBackend> sim_backend_;
  std::unique_ptr<CountingBackend> backend_;
  GlobalFrontier frontier_;
  UrlDatabase db_;
  std::unique_ptr<Repository> repo_;
  std::unique_ptr<PolitenessGate> gate_;
  std::unique_ptr<Dispatcher> dispatcher_;
  std::optional<Assignment> assignment_;
  InboxSet inboxes_;

  std::map<std::string, long long> per_domain_fetched_;
  long long fetch_attempts_ = 0;
  long long pages_downloaded_ = 0;
  long long fetch_errors_ = 0;
  long long routed_delivered_ = 0;
  long long routed_deferred_ = 0;
  long long rebalance_events_ = 0;
  long long post_rebalance_spread_ = 0;
  long long total_rounds_ = 0;
  long long wall_time_ms_ = 0;
  std::string stop_reason_;
};

inline CrawlReport run_crawl(const Config& config, FetchBackend* live_backend = nullptr) {
  CrawlEngine engine(config, live_backend);
  return engine.run();
}

}  // namespace webparf
