#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "webparf/errors.hpp"
#include "webparf/fetcher.hpp"
#include "webparf/frontier.hpp"
#include "webparf/url.hpp"

namespace webparf {

struct GraphParams {
  std::vector<DomainProfile> domains;  // seeds are ignored; page 0 is the seed
  int pages_per_domain = 1;
  int intra_links = 0;
  int cross_links = 0;
  int keyword_freq = 1;
  double noise_ratio = 0.0;
  double alias_fraction = 0.0;
  std::uint64_t rng_seed = 0;
};

struct SimPage {
  std::string url;  // primary canonical string
  std::string true_domain;
  std::string body;
  std::vector<std::string> out_links;  // canonical strings, primary or alias
};

struct GroundTruth {
  std::map<std::string, std::set<std::string>> domain_pages;  // domain -> primary urls
  std::map<std::string, std::string> aliases;                 // alias -> primary
  std::set<std::string> reachable;                            // primary urls reachable from seeds
};

namespace detail {

// All randomness goes through modulo draws on mt19937_64 so a given seed
// produces the same web on every standard library.
inline std::size_t draw(std::mt19937_64& rng, std::size_t n) {
  return n == 0 ? 0 : static_cast<std::size_t>(rng() % n);
}

template <typename T>
inline void shuffle_prefix(std::vector<T>& items, std::size_t take, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < take && i + 1 < items.size(); ++i) {
    std::size_t j = i + draw(rng, items.size() - i);
    std::swap(items[i], items[j]);
  }
}

inline bool valid_domain_name(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name)
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '-'))
      return false;
  return true;
}

inline bool valid_keyword(const std::string& word) {
  if (word.empty()) return false;
  for (char c : word)
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c))))
      return false;
  return true;
}

}  // namespace detail

// A generated multi-domain web with ground-truth labels. Immutable after
// generation; sim_fetch is read-only and freely concurrent.
class SyntheticWeb {
 public:
  const std::map<std::string, SimPage>& pages() const { return pages_; }
  const std::map<std::string, std::string>& aliases() const { return aliases_; }
  const std::vector<std::string>& seeds() const { return seeds_; }
  const std::vector<DomainProfile>& profiles() const { return profiles_; }
  const GroundTruth& truth() const { return truth_; }

  FetchResult sim_fetch(const CanonicalUrl& url) const {
    std::string key = render(url);
    FetchResult result;
    result.url = url;
    auto alias = aliases_.find(key);
    if (alias != aliases_.end()) key = alias->second;
    auto page = pages_.find(key);
    if (page == pages_.end()) {
      result.status = 404;
      return result;
    }
    result.status = 200;
    result.body = page->second.body;
    result.content_type = "text/html";
    return result;
  }

  nlohmann::json to_json() const {
    nlohmann::json domains = nlohmann::json::array();
    for (const DomainProfile& profile : profiles_) {
      nlohmann::json kws = nlohmann::json::array();
      for (const std::string& k : profile.keywords) kws.push_back(k);
      domains.push_back({{"name", profile.name}, {"keywords", kws}});
    }
    nlohmann::json pages = nlohmann::json::array();
    for (const auto& [url, page] : pages_) {
      pages.push_back({{"url", url},
                       {"domain", page.true_domain},
                       {"body", page.body},
                       {"links", page.out_links}});
    }
    nlohmann::json truth{{"domain_pages", truth_.domain_pages},
                         {"reachable", truth_.reachable}};
    return nlohmann::json{{"domains", domains},
                          {"pages", pages},
                          {"aliases", aliases_},
                          {"seeds", seeds_},
                          {"truth", truth}};
  }

  static SyntheticWeb from_json(const nlohmann::json& j) {
    SyntheticWeb web;
    for (const auto& d : j.at("domains")) {
      DomainProfile profile;
      profile.name = d.at("name").get<std::string>();
      for (const auto& k : d.at("keywords")) profile.keywords.insert(k.get<std::string>());
      web.profiles_.push_back(std::move(profile));
    }
    for (const auto& p : j.at("pages")) {
      SimPage page;
      page.url = p.at("url").get<std::string>();
      page.true_domain = p.at("domain").get<std::string>();
      page.body = p.at("body").get<std::string>();
      for (const auto& l : p.at("links")) page.out_links.push_back(l.get<std::string>());
      web.pages_.emplace(page.url, std::move(page));
    }
    web.aliases_ = j.at("aliases").get<std::map<std::string, std::string>>();
    web.seeds_ = j.at("seeds").get<std::vector<std::string>>();
    web.check_closure();
    web.compute_truth();
    return web;
  }

  friend SyntheticWeb generate(const GraphParams& params);

 private:
  void check_closure() const {
    for (const auto& [url, page] : pages_)
      for (const std::string& link : page.out_links)
        if (!pages_.contains(link) && !aliases_.contains(link))
          throw InvalidParamsError("dangling link " + link + " from " + url);
    for (const auto& [alias, primary] : aliases_)
      if (!pages_.contains(primary))
        throw InvalidParamsError("alias points at unknown page: " + alias);
  }

  void compute_truth() {
    truth_ = GroundTruth{};
    truth_.aliases = aliases_;
    for (const auto& [url, page] : pages_) truth_.domain_pages[page.true_domain].insert(url);

    std::deque<std::string> work(seeds_.begin(), seeds_.end());
    while (!work.empty()) {
      std::string key = work.front();
      work.pop_front();
      auto alias = aliases_.find(key);
      if (alias != aliases_.end()) key = alias->second;
      auto page = pages_.find(key);
      if (page == pages_.end()) continue;
      if (!truth_.reachable.insert(key).second) continue;
      for (const std::string& link : page->second.out_links) work.push_back(link);
    }
  }

  std::map<std::string, SimPage> pages_;
  std::map<std::string, std::string> aliases_;
  std::vector<std::string> seeds_;
  std::vector<DomainProfile> profiles_;
  GroundTruth truth_;
};

// Deterministic generator: same params, same web, byte for byte.
//
// Construction guarantees, relied on by the test harnesses:
//   - page i chains to page (i+1) mod P of its domain whenever intra_links
//     >= 1, so every page of a seeded domain is reachable;
//   - bodies hold each true-domain keyword exactly keyword_freq times plus
//     at most floor(noise_ratio * keyword_count * keyword_freq) noise
//     keywords, one occurrence each, capped so that no other domain's hit
//     count can reach the true domain's;
//   - a per-page marker inside a <script> block (invisible to text
//     extraction) makes every body byte-distinct;
//   - aliased pages are referenced by one extra link from a same-domain
//     page, so aliases are reachable exactly when their domain is.
inline SyntheticWeb generate(const GraphParams& params) {
  const int domain_count = static_cast<int>(params.domains.size());
  const int per_domain = params.pages_per_domain;
  if (domain_count < 1) throw InvalidParamsError("at least one domain required");
  if (per_domain < 1) throw InvalidParamsError("pages_per_domain must be >= 1");
  if (params.keyword_freq < 0) throw InvalidParamsError("keyword_freq must be >= 0");
  if (params.noise_ratio < 0.0 || params.noise_ratio > 1.0)
    throw InvalidParamsError("noise_ratio must be within [0,1]");
  if (params.alias_fraction < 0.0 || params.alias_fraction > 1.0)
    throw InvalidParamsError("alias_fraction must be within [0,1]");
  if (params.intra_links < 0 || params.cross_links < 0)
    throw InvalidParamsError("link counts must be >= 0");
  if (params.intra_links + params.cross_links >= domain_count * per_domain)
    throw InvalidParamsError("per-page link count must stay below the page count");
  if (params.intra_links > per_domain - 1)
    throw InvalidParamsError("intra_links cannot exceed pages_per_domain - 1");
  if (params.cross_links > (domain_count - 1) * per_domain)
    throw InvalidParamsError("cross_links cannot exceed the other domains' page count");

  std::set<std::string> names;
  for (const DomainProfile& profile : params.domains) {
    if (!detail::valid_domain_name(profile.name))
      throw InvalidParamsError("invalid domain name: " + profile.name);
    if (profile.name == kUnclassified)
      throw InvalidParamsError("domain name 'unclassified' is reserved");
    if (!names.insert(profile.name).second)
      throw InvalidParamsError("duplicate domain name: " + profile.name);
    if (profile.keywords.empty())
      throw InvalidParamsError("domain " + profile.name + " needs at least one keyword");
    for (const std::string& k : profile.keywords)
      if (!detail::valid_keyword(k))
        throw InvalidParamsError("invalid keyword '" + k + "' in domain " + profile.name);
  }

  auto primary_url = [&](int d, int i) {
    return "http://" + params.domains[static_cast<std::size_t>(d)].name + ".test/p" +
           std::to_string(i);
  };
  auto alias_url = [&](int d, int i) {
    return "http://" + params.domains[static_cast<std::size_t>(d)].name + ".test/alias/p" +
           std::to_string(i);
  };

  std::mt19937_64 rng(params.rng_seed);
  SyntheticWeb web;
  web.profiles_ = params.domains;

  // Pass 1: link structure.
  std::vector<std::vector<std::vector<std::string>>> links(
      static_cast<std::size_t>(domain_count),
      std::vector<std::vector<std::string>>(static_cast<std::size_t>(per_domain)));
  for (int d = 0; d < domain_count; ++d) {
    for (int i = 0; i < per_domain; ++i) {
      auto& out = links[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)];
      if (params.intra_links >= 1) {
        int chain = (i + 1) % per_domain;
        out.push_back(primary_url(d, chain));
        std::vector<int> candidates;
        for (int j = 0; j < per_domain; ++j)
          if (j != i && j != chain) candidates.push_back(j);
        std::size_t extra = static_cast<std::size_t>(params.intra_links - 1);
        detail::shuffle_prefix(candidates, extra, rng);
        for (std::size_t k = 0; k < extra; ++k)
          out.push_back(primary_url(d, candidates[k]));
      }
      if (params.cross_links >= 1) {
        std::vector<std::pair<int, int>> candidates;
        for (int od = 0; od < domain_count; ++od) {
          if (od == d) continue;
          for (int j = 0; j < per_domain; ++j) candidates.emplace_back(od, j);
        }
        std::size_t take = static_cast<std::size_t>(params.cross_links);
        detail::shuffle_prefix(candidates, take, rng);
        for (std::size_t k = 0; k < take; ++k)
          out.push_back(primary_url(candidates[k].first, candidates[k].second));
      }
    }
  }

  // Pass 2: alias selection plus the extra in-domain link that reveals each
  // alias to the crawl.
  std::size_t alias_count = static_cast<std::size_t>(
      params.alias_fraction * static_cast<double>(domain_count * per_domain));
  std::vector<int> page_ids(static_cast<std::size_t>(domain_count * per_domain));
  for (std::size_t n = 0; n < page_ids.size(); ++n) page_ids[n] = static_cast<int>(n);
  detail::shuffle_prefix(page_ids, alias_count, rng);
  std::vector<int> aliased(page_ids.begin(),
                           page_ids.begin() + static_cast<std::ptrdiff_t>(alias_count));
  std::sort(aliased.begin(), aliased.end());
  for (int id : aliased) {
    int d = id / per_domain;
    int i = id % per_domain;
    web.aliases_[alias_url(d, i)] = primary_url(d, i);
    int source = per_domain == 1
                     ? i
                     : (i + 1 + static_cast<int>(detail::draw(
                                    rng, static_cast<std::size_t>(per_domain - 1)))) %
                           per_domain;
    links[static_cast<std::size_t>(d)][static_cast<std::size_t>(source)].push_back(
        alias_url(d, i));
  }

  // Pass 3: bodies.
  for (int d = 0; d < domain_count; ++d) {
    const DomainProfile& profile = params.domains[static_cast<std::size_t>(d)];
    std::vector<std::string> own(profile.keywords.begin(), profile.keywords.end());
    const int base_score = static_cast<int>(own.size()) * params.keyword_freq;

    // Noise pool: every other domain's keywords that this domain does not
    // share, with the full owner list per keyword for the separability cap.
    std::map<std::string, std::vector<int>> owners;
    for (int od = 0; od < domain_count; ++od) {
      if (od == d) continue;
      for (const std::string& k : params.domains[static_cast<std::size_t>(od)].keywords)
        if (!profile.keywords.contains(k)) owners[k].push_back(od);
    }
    std::vector<std::string> noise_pool;
    for (const auto& [k, who] : owners) noise_pool.push_back(k);

    for (int i = 0; i < per_domain; ++i) {
      std::vector<std::string> tokens;
      for (const std::string& k : own)
        for (int r = 0; r < params.keyword_freq; ++r) tokens.push_back(k);

      std::size_t wanted =
          static_cast<std::size_t>(params.noise_ratio * static_cast<double>(base_score));
      std::vector<std::string> pool = noise_pool;
      detail::shuffle_prefix(pool, pool.size(), rng);
      std::map<int, int> noise_per_domain;
      std::size_t added = 0;
      for (const std::string& k : pool) {
        if (added >= wanted) break;
        bool safe = true;
        for (int od : owners.at(k))
          if (noise_per_domain[od] + 1 >= base_score) safe = false;
        if (!safe) continue;
        for (int od : owners.at(k)) ++noise_per_domain[od];
        tokens.push_back(k);
        ++added;
      }

      detail::shuffle_prefix(tokens, tokens.size(), rng);

      std::string url = primary_url(d, i);
      std::string body = "<html><head><script>page \"" + url + "\"</script></head><body>\n<p>";
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (t) body += ' ';
        body += tokens[t];
      }
      body += "</p>\n";
      for (const std::string& link :
           links[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)])
        body += "<a href=\"" + link + "\"></a>\n";
      body += "</body></html>\n";

      SimPage page;
      page.url = url;
      page.true_domain = profile.name;
      page.body = std::move(body);
      page.out_links = links[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)];
      web.pages_.emplace(url, std::move(page));
    }
    web.seeds_.push_back(primary_url(d, 0));
  }

  web.check_closure();
  web.compute_truth();
  return web;
}

inline const GroundTruth& ground_truth(const SyntheticWeb& web) { return web.truth(); }

class SimWebBackend : public FetchBackend {
 public:
  explicit SimWebBackend(const SyntheticWeb& web) : web_(web) {}
  FetchResult fetch(const CanonicalUrl& url) override { return web_.sim_fetch(url); }

 private:
  const SyntheticWeb& web_;
};

}  // namespace webparf
