#include "webparf/frontier.hpp"

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <atomic>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <string>
#include <vector>

using namespace webparf;

namespace {

CanonicalUrl url_of(const std::string& raw) {
  auto url = canonicalize(raw);
  REQUIRE(url.has_value());
  return *url;
}

DomainProfile sports_profile() {
  DomainProfile profile;
  profile.name = "sports";
  profile.keywords = {"football", "score"};
  profile.seeds = {url_of("http://s1.test/"), url_of("http://s2.test/")};
  return profile;
}

}  // namespace

TEST_CASE("relevance_score is floor of the weighted sum") {
  CHECK(relevance_score(0, 0, {1.0, 0.5}) == 0);
  CHECK(relevance_score(3, 2, {1.0, 1.0}) == 5);
  CHECK(relevance_score(3, 3, {1.0, 0.5}) == 4);  // floor(3 + 1.5)
  CHECK(relevance_score(1, 1, {0.0, 0.0}) == 0);
}

TEST_CASE("property: relevance_score is monotone in both counters") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    ScoreWeights w{static_cast<double>(rng() % 50) / 10.0,
                   static_cast<double>(rng() % 50) / 10.0};
    int inlinks = static_cast<int>(rng() % 100);
    int requests = static_cast<int>(rng() % 100);
    int base = relevance_score(inlinks, requests, w);
    CHECK(relevance_score(inlinks + 1, requests, w) >= base);
    CHECK(relevance_score(inlinks, requests + 1, w) >= base);
  }
}

TEST_CASE("create_pool admits seeds at score zero") {
  GlobalFrontier frontier;
  frontier.create_pool(sports_profile(), {});
  auto nodes = frontier.snapshot("sports");
  REQUIRE(nodes.size() == 1);
  CHECK(nodes[0].score == 0);
  CHECK(nodes[0].urls == std::vector<std::string>{"http://s1.test/", "http://s2.test/"});
}

TEST_CASE("create_pool rejects duplicate domains") {
  GlobalFrontier frontier;
  frontier.create_pool(sports_profile(), {});
  CHECK_THROWS_AS(frontier.create_pool(sports_profile(), {}), DuplicateDomainError);
}

TEST_CASE("create_pool with empty seed list makes an empty valid pool") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  CHECK(frontier.snapshot("news").empty());
  CHECK(frontier.queue_size("news") == 0);
}

TEST_CASE("the reserved unclassified pool always exists") {
  GlobalFrontier frontier;
  CHECK(frontier.has_domain(kUnclassified));
  CHECK(frontier.snapshot(kUnclassified).empty());
  DomainProfile reserved;
  reserved.name = kUnclassified;
  CHECK_THROWS_AS(frontier.create_pool(reserved, {}), DuplicateDomainError);
}

TEST_CASE("enqueue groups urls into score nodes in fifo order") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  CHECK(frontier.enqueue("news", url_of("http://u1.test/"), 5) == EnqueueResult::admitted);
  CHECK(frontier.enqueue("news", url_of("http://u2.test/"), 3) == EnqueueResult::admitted);
  CHECK(frontier.enqueue("news", url_of("http://u3.test/"), 5) == EnqueueResult::admitted);

  auto nodes = frontier.snapshot("news");
  REQUIRE(nodes.size() == 2);
  CHECK(nodes[0].position == 1);
  CHECK(nodes[0].score == 5);
  CHECK(nodes[0].urls == std::vector<std::string>{"http://u1.test/", "http://u3.test/"});
  CHECK(nodes[1].position == 2);
  CHECK(nodes[1].score == 3);
  CHECK(nodes[1].urls == std::vector<std::string>{"http://u2.test/"});

  SECTION("dequeue follows score order, fifo within a node") {
    CHECK(render(frontier.dequeue("news")->url) == "http://u1.test/");
    CHECK(render(frontier.dequeue("news")->url) == "http://u3.test/");
    CHECK(render(frontier.dequeue("news")->url) == "http://u2.test/");
    CHECK_FALSE(frontier.dequeue("news").has_value());
  }

  SECTION("snapshot flattening equals dequeue order") {
    std::vector<std::string> flattened;
    for (const auto& node : nodes)
      for (const auto& url : node.urls) flattened.push_back(url);
    std::vector<std::string> drained;
    while (auto entry = frontier.dequeue("news")) drained.push_back(render(entry->url));
    CHECK(flattened == drained);
  }
}

TEST_CASE("enqueue rejects a duplicate admission") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  CHECK(frontier.enqueue("news", url_of("http://u1.test/"), 5) == EnqueueResult::admitted);
  CHECK(frontier.enqueue("news", url_of("http://u1.test/"), 5) ==
        EnqueueResult::rejected_duplicate);
  CHECK(frontier.queue_size("news") == 1);
}

TEST_CASE("the dedup set spans domains: a url lives in at most one queue") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  frontier.create_pool({"sports", {"goal"}, {}}, {});
  CHECK(frontier.enqueue("news", url_of("http://u1.test/"), 5) == EnqueueResult::admitted);
  CHECK(frontier.enqueue("sports", url_of("http://u1.test/"), 9) ==
        EnqueueResult::rejected_duplicate);
  CHECK(frontier.queue_size("sports") == 0);
  CHECK(frontier.seen_count() == 1);
}

TEST_CASE("enqueue into an empty queue creates a single node at position 1") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  frontier.enqueue("news", url_of("http://u.test/"), 7);
  auto nodes = frontier.snapshot("news");
  REQUIRE(nodes.size() == 1);
  CHECK(nodes[0].position == 1);
}

TEST_CASE("operations on unknown domains throw") {
  GlobalFrontier frontier;
  CHECK_THROWS_AS(frontier.enqueue("nope", url_of("http://u.test/"), 1), UnknownDomainError);
  CHECK_THROWS_AS(frontier.dequeue("nope"), UnknownDomainError);
  CHECK_THROWS_AS(frontier.snapshot("nope"), UnknownDomainError);
}

TEST_CASE("dequeue on an empty queue returns the empty marker") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  CHECK_FALSE(frontier.dequeue("news").has_value());
}

TEST_CASE("dequeued entries transition pending to issued") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  frontier.enqueue("news", url_of("http://u.test/"), 2);
  auto entry = frontier.dequeue("news");
  REQUIRE(entry.has_value());
  CHECK(entry->state == EntryState::issued);
}

TEST_CASE("record_request and record_inlink update counters") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  CanonicalUrl u = url_of("http://u.test/");
  frontier.enqueue("news", u, 0);
  frontier.record_request(u);
  frontier.record_request(u);
  frontier.record_request(u);
  CHECK(frontier.counters(u).requests == 3);
  frontier.record_inlink(u);
  CHECK(frontier.counters(u).inlinks == 1);
}

TEST_CASE("record_inlink on an unseen url throws UnknownUrl") {
  GlobalFrontier frontier;
  CHECK_THROWS_AS(frontier.record_inlink(url_of("http://nope.test/")), UnknownUrlError);
  CHECK_THROWS_AS(frontier.record_request(url_of("http://nope.test/")), UnknownUrlError);
  CHECK_THROWS_AS(frontier.counters(url_of("http://nope.test/")), UnknownUrlError);
}

TEST_CASE("counter updates never move an already-queued entry") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  CanonicalUrl low = url_of("http://low.test/");
  CanonicalUrl high = url_of("http://high.test/");
  frontier.enqueue("news", high, 2);
  frontier.enqueue("news", low, 1);
  for (int i = 0; i < 10; ++i) frontier.record_inlink(low);

  auto nodes = frontier.snapshot("news");
  REQUIRE(nodes.size() == 2);
  CHECK(nodes[0].urls == std::vector<std::string>{"http://high.test/"});
  CHECK(nodes[1].urls == std::vector<std::string>{"http://low.test/"});
}

TEST_CASE("requeue returns an issued entry to the tail of its score node") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  frontier.enqueue("news", url_of("http://u1.test/"), 5);
  frontier.enqueue("news", url_of("http://u2.test/"), 5);
  auto entry = frontier.dequeue("news");
  REQUIRE(entry.has_value());
  frontier.requeue("news", *entry);

  auto nodes = frontier.snapshot("news");
  REQUIRE(nodes.size() == 1);
  CHECK(nodes[0].urls == std::vector<std::string>{"http://u2.test/", "http://u1.test/"});
  CHECK(frontier.seen_count() == 2);  // dedup set untouched
}

TEST_CASE("property: drain order is a stable sort of the insertion log") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 6; ++trial) {
    const int entries = trial == 5 ? 10000 : 1000;
    GlobalFrontier frontier;
    frontier.create_pool({"news", {"headline"}, {}}, {});

    std::vector<std::pair<std::string, int>> log;
    for (int i = 0; i < entries; ++i) {
      std::string url = "http://t" + std::to_string(trial) + ".test/u" + std::to_string(i);
      int score = static_cast<int>(rng() % 10);
      frontier.enqueue("news", url_of(url), score);
      log.emplace_back(url, score);
    }

    std::vector<std::pair<std::string, int>> expected = log;
    std::stable_sort(expected.begin(), expected.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::pair<std::string, int>> drained;
    while (auto entry = frontier.dequeue("news"))
      drained.emplace_back(render(entry->url), entry->score);

    REQUIRE(drained.size() == expected.size());
    CHECK(drained == expected);
  }
}

TEST_CASE("property: node positions stay contiguous with strictly decreasing scores") {
  std::mt19937_64 rng(17);
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  int next_url = 0;
  for (int step = 0; step < 2000; ++step) {
    if (rng() % 3 != 0) {
      frontier.enqueue("news", url_of("http://n.test/u" + std::to_string(next_url++)),
                       static_cast<int>(rng() % 8));
    } else {
      frontier.dequeue("news");
    }
    if (step % 100 == 0) {
      auto nodes = frontier.snapshot("news");
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        CHECK(nodes[i].position == static_cast<int>(i) + 1);
        CHECK_FALSE(nodes[i].urls.empty());
        if (i > 0) CHECK(nodes[i - 1].score > nodes[i].score);
      }
    }
  }
}

TEST_CASE("concurrent enqueue and dequeue neither lose nor duplicate urls") {
  GlobalFrontier frontier;
  const int producer_count = 4;
  const int per_producer = 500;
  for (int p = 0; p < producer_count; ++p)
    frontier.create_pool({"d" + std::to_string(p), {"kw"}, {}}, {});

  std::vector<std::thread> producers;
  for (int p = 0; p < producer_count; ++p) {
    producers.emplace_back([&frontier, p] {
      std::mt19937_64 rng(static_cast<std::uint64_t>(p));
      for (int i = 0; i < per_producer; ++i) {
        std::string domain = "d" + std::to_string(static_cast<int>(rng() % producer_count));
        auto url = canonicalize("http://c.test/p" + std::to_string(p) + "i" + std::to_string(i));
        frontier.enqueue(domain, *url, static_cast<int>(rng() % 5));
      }
    });
  }

  std::mutex drained_mutex;
  std::set<std::string> drained;
  bool duplicate_seen = false;
  std::atomic<bool> stop{false};
  std::vector<std::thread> consumers;
  for (int c = 0; c < producer_count; ++c) {
    consumers.emplace_back([&, c] {
      std::string domain = "d" + std::to_string(c);
      while (!stop.load()) {
        if (auto entry = frontier.dequeue(domain)) {
          std::scoped_lock lock(drained_mutex);
          if (!drained.insert(render(entry->url)).second) duplicate_seen = true;
        }
      }
    });
  }

  for (auto& t : producers) t.join();
  stop.store(true);
  for (auto& t : consumers) t.join();
  for (int p = 0; p < producer_count; ++p) {
    std::string domain = "d" + std::to_string(p);
    while (auto entry = frontier.dequeue(domain)) {
      std::scoped_lock lock(drained_mutex);
      if (!drained.insert(render(entry->url)).second) duplicate_seen = true;
    }
  }

  CHECK_FALSE(duplicate_seen);
  CHECK(drained.size() == producer_count * per_producer);
  CHECK(frontier.seen_count() == producer_count * per_producer);
}

TEST_CASE("no url is ever dequeued twice across the frontier lifetime") {
  GlobalFrontier frontier;
  frontier.create_pool({"news", {"headline"}, {}}, {});
  std::set<std::string> dequeued;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    std::string url = "http://n.test/u" + std::to_string(static_cast<int>(rng() % 300));
    frontier.enqueue("news", url_of(url), static_cast<int>(rng() % 4));
    if (rng() % 2 == 0) {
      if (auto entry = frontier.dequeue("news"))
        CHECK(dequeued.insert(render(entry->url)).second);
    }
  }
  while (auto entry = frontier.dequeue("news"))
    CHECK(dequeued.insert(render(entry->url)).second);
}
