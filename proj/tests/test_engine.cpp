#include "webparf/engine.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>
#include <string>

using namespace webparf;

namespace {

nlohmann::json minimal_config_json() {
  return nlohmann::json{
      {"domains",
       {{{"name", "news"},
         {"keywords", {"headline"}},
         {"seeds", {"http://news.test/p0"}}}}},
      {"backend", {{"mode", "sim"}}}};
}

nlohmann::json sim_config_json(int pages_per_domain, std::uint64_t seed) {
  return nlohmann::json{
      {"domains",
       {{{"name", "news"}, {"keywords", {"election", "headline"}}},
        {{"name", "sports"}, {"keywords", {"football", "goal"}}}}},
      {"backend",
       {{"mode", "sim"},
        {"graph",
         {{"pages_per_domain", pages_per_domain},
          {"intra_links", 2},
          {"cross_links", 1},
          {"keyword_freq", 3},
          {"noise_ratio", 0.5},
          {"rng_seed", seed}}}}}};
}

nlohmann::json strip_wall_time(nlohmann::json j) {
  j.erase("wall_time_ms");
  return j;
}

}  // namespace

TEST_CASE("load_config fills documented defaults") {
  nlohmann::json j = minimal_config_json();
  Config config = config_from_json(j);
  CHECK(config.workers == 1);  // one per domain
  CHECK(config.inbox_capacity == 16);
  CHECK(config.batch_size == 64);
  CHECK(config.weights.alpha == 1.0);
  CHECK(config.weights.beta == 0.5);
  CHECK(config.backend == BackendMode::sim);
  REQUIRE(config.domains.size() == 1);
  CHECK(config.domains[0].seeds.size() == 1);
}

TEST_CASE("load_config rejects zero workers") {
  nlohmann::json j = minimal_config_json();
  j["workers"] = 0;
  CHECK_THROWS_AS(config_from_json(j), InvariantViolation);
}

TEST_CASE("load_config names unknown fields") {
  nlohmann::json j = minimal_config_json();
  j["wokers"] = 3;
  CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("wokers"));

  nlohmann::json bad_domain = minimal_config_json();
  bad_domain["domains"][0]["keyword"] = nlohmann::json::array();
  CHECK_THROWS_WITH(config_from_json(bad_domain),
                    Catch::Matchers::ContainsSubstring("keyword"));
}

TEST_CASE("load_config validates values") {
  auto with = [](const char* key, nlohmann::json value) {
    nlohmann::json j = minimal_config_json();
    j[key] = std::move(value);
    return j;
  };
  CHECK_THROWS_AS(config_from_json(with("inbox_capacity", 0)), InvariantViolation);
  CHECK_THROWS_AS(config_from_json(with("batch_size", 0)), InvariantViolation);
  CHECK_THROWS_AS(config_from_json(with("politeness_ms", -5)), InvariantViolation);
  CHECK_THROWS_AS(config_from_json(with("max_pages", 0)), InvariantViolation);
  CHECK_THROWS_AS(config_from_json(with("score_weights", {{"alpha", -1.0}})),
                  InvariantViolation);
  CHECK_THROWS_AS(config_from_json(with("kill_worker", {{"worker", 5}, {"round", 1}})),
                  InvariantViolation);

  nlohmann::json no_domains = minimal_config_json();
  no_domains["domains"] = nlohmann::json::array();
  CHECK_THROWS_AS(config_from_json(no_domains), InvariantViolation);

  nlohmann::json bad_seed = minimal_config_json();
  bad_seed["domains"][0]["seeds"] = {"not a url"};
  CHECK_THROWS_AS(config_from_json(bad_seed), InvariantViolation);

  nlohmann::json reserved = minimal_config_json();
  reserved["domains"][0]["name"] = "unclassified";
  CHECK_THROWS_AS(config_from_json(reserved), InvariantViolation);

  nlohmann::json live_without_stop = minimal_config_json();
  live_without_stop["backend"] = {{"mode", "live"}};
  CHECK_THROWS_AS(config_from_json(live_without_stop), InvariantViolation);
}

TEST_CASE("load_config reports missing files with the path") {
  try {
    load_config("/does/not/exist.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/does/not/exist.json") != std::string::npos);
  }
}

TEST_CASE("a small sim crawl reaches full coverage with zero overlap") {
  Config config = config_from_json(sim_config_json(10, 7));
  CrawlEngine engine(config);
  CrawlReport report = engine.run();

  CHECK(report.stop_reason == "frontier-exhausted");
  REQUIRE(report.coverage.has_value());
  CHECK(*report.coverage == 1.0);
  CHECK(report.url_overlap == 0);
  REQUIRE(report.misclassified.has_value());
  CHECK(*report.misclassified == 0);
  CHECK(report.pages_downloaded == 20);
  CHECK(report.stored_pages == 20);
  CHECK(report.per_domain_fetched.at("news") == 10);
  CHECK(report.per_domain_fetched.at("sports") == 10);
  CHECK(report.per_domain_fetched.at(kUnclassified) == 0);

  for (const auto& [url, count] : engine.backend_counts()) CHECK(count == 1);
  for (const auto& [domain, residue] : report.frontier_residue) CHECK(residue == 0);
}

TEST_CASE("max_pages stops the crawl within the in-flight slack") {
  nlohmann::json j = sim_config_json(50, 11);
  j["max_pages"] = 10;
  j["workers"] = 2;
  Config config = config_from_json(j);
  CrawlReport report = run_crawl(config);
  CHECK(report.stop_reason == "max-pages");
  CHECK(report.pages_downloaded <= 10 + 2 - 1);
  CHECK(report.pages_downloaded >= 10);
}

TEST_CASE("max_rounds stops the crawl") {
  nlohmann::json j = sim_config_json(50, 11);
  j["max_rounds"] = 3;
  CrawlReport report = run_crawl(config_from_json(j));
  CHECK(report.stop_reason == "max-rounds");
  CHECK(report.total_rounds == 3);
}

TEST_CASE("an empty sim web exhausts immediately after failing its seeds") {
  Config config = config_from_json(minimal_config_json());
  CrawlReport report = run_crawl(config);
  CHECK(report.stop_reason == "frontier-exhausted");
  CHECK(report.pages_downloaded == 0);
  CHECK(report.fetch_errors == 1);  // the configured seed 404s
  CHECK(report.total_rounds == 1);
}

TEST_CASE("sim reports are bit-identical for a fixed config") {
  Config config = config_from_json(sim_config_json(15, 21));
  nlohmann::json first = strip_wall_time(report_json(run_crawl(config)));
  nlohmann::json second = strip_wall_time(report_json(run_crawl(config)));
  CHECK(first.dump() == second.dump());
}

TEST_CASE("killing a worker mid-run preserves coverage") {
  nlohmann::json j = sim_config_json(12, 33);
  j["workers"] = 2;
  Config config = config_from_json(j);
  CrawlReport baseline = run_crawl(config);
  REQUIRE(baseline.coverage.has_value());

  j["kill_worker"] = {{"worker", 1}, {"round", 2}};
  Config with_kill = config_from_json(j);
  CrawlEngine engine(with_kill);
  CrawlReport report = engine.run();

  CHECK(report.rebalance_events == 1);
  REQUIRE(report.coverage.has_value());
  CHECK(*report.coverage == *baseline.coverage);
  CHECK(*report.coverage == 1.0);
  CHECK(report.url_overlap == 0);
  REQUIRE(report.post_rebalance_spread.has_value());
  CHECK(*report.post_rebalance_spread <= 1);
  CHECK_FALSE(engine.assignment().is_live(1));
}

TEST_CASE("content duplicates equal fetched alias urls") {
  nlohmann::json j = sim_config_json(10, 5);
  j["backend"]["graph"]["alias_fraction"] = 0.3;
  Config config = config_from_json(j);
  CrawlEngine engine(config);
  CrawlReport report = engine.run();

  const SyntheticWeb* web = engine.web();
  REQUIRE(web != nullptr);
  long long fetched_aliases = 0;
  for (const auto& [alias, primary] : web->aliases())
    if (engine.backend_counts().contains(alias)) ++fetched_aliases;

  CHECK(report.content_duplicates == fetched_aliases);
  CHECK(report.stored_pages == 20);  // one body per primary page
  CHECK(report.pages_downloaded == 20 + fetched_aliases);
}

TEST_CASE("graph_file runs match in-place generation") {
  Config config = config_from_json(sim_config_json(8, 9));
  SyntheticWeb web = generate(*config.graph);

  std::string path = "test_engine_webdump.json";
  {
    std::ofstream out(path);
    out << web.to_json().dump();
  }
  nlohmann::json j = sim_config_json(8, 9);
  j["backend"] = {{"mode", "sim"}, {"graph_file", path}};
  Config from_file = config_from_json(j);

  nlohmann::json a = strip_wall_time(report_json(run_crawl(config)));
  nlohmann::json b = strip_wall_time(report_json(run_crawl(from_file)));
  CHECK(a.dump() == b.dump());
  std::remove(path.c_str());
}

TEST_CASE("live mode without a backend is a config error") {
  nlohmann::json j = minimal_config_json();
  j["backend"] = {{"mode", "live"}};
  j["max_pages"] = 5;
  Config config = config_from_json(j);
  CrawlEngine engine(config);
  CHECK_THROWS_AS(engine.run(), ConfigError);
}

TEST_CASE("output_dir persists the repository layout and the url journal") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "webparf_engine_out_test";
  fs::remove_all(dir);

  nlohmann::json j = sim_config_json(4, 3);
  j["output_dir"] = dir.string();
  Config config = config_from_json(j);
  CrawlEngine engine(config);
  engine.run();

  // pages/<hex-digest> holds each stored body byte-for-byte
  auto records = engine.repository().records();
  CHECK_FALSE(records.empty());
  for (const auto& [digest, record] : records) {
    fs::path body_file = dir / "pages" / digest_hex(digest);
    REQUIRE(fs::exists(body_file));
    std::ifstream in(body_file, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(bytes == record.body);
  }

  // index.jsonl carries one object per fetched url, last line wins per url
  std::ifstream index_in(dir / "index.jsonl");
  REQUIRE(index_in.good());
  std::map<std::string, nlohmann::json> last_line;
  std::string line;
  while (std::getline(index_in, line)) {
    nlohmann::json entry = nlohmann::json::parse(line);
    for (const char* key : {"url", "digest", "domain", "round"}) CHECK(entry.contains(key));
    last_line[entry.at("url")] = entry;
  }
  auto index = engine.repository().index();
  CHECK(last_line.size() == index.size());
  for (const auto& [url, entry] : index) {
    REQUIRE(last_line.contains(url));
    CHECK(last_line.at(url).at("digest") == digest_hex(entry.digest));
    CHECK(last_line.at(url).at("domain") == entry.domain);
  }

  // urldb.jsonl replays into an equivalent database
  UrlDatabase replayed;
  replayed.replay(dir / "urldb.jsonl");
  auto original = engine.url_db().entries();
  CHECK(replayed.size() == original.size());
  for (const auto& [url, entry] : original) {
    auto copy = replayed.find(entry.url);
    REQUIRE(copy.has_value());
    CHECK(copy->domain == entry.domain);
    CHECK(copy->provenance == entry.provenance);
    CHECK(copy->state == entry.state);
  }

  fs::remove_all(dir);
}

TEST_CASE("url database reflects the crawl lifecycle") {
  Config config = config_from_json(sim_config_json(6, 13));
  CrawlEngine engine(config);
  engine.run();

  for (const auto& [url, entry] : engine.url_db().entries()) {
    CHECK((entry.state == UrlState::fetched || entry.state == UrlState::failed));
    if (entry.provenance == Provenance::seed) continue;
    CHECK(entry.provenance == Provenance::classified);  // fetched pages get tagged
  }
}
