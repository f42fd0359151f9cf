// webparf command line: run crawls (live or simulated), generate synthetic
// webs, dump frontier contents, and pretty-print saved reports.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "webparf/engine.hpp"
#include "webparf/http_backend.hpp"
#include "webparf/webparf.hpp"

namespace {

webparf::KillSpec parse_kill(const std::string& text) {
  auto at = text.find('@');
  if (at == std::string::npos)
    throw webparf::ParseError("--kill-worker expects <worker>@<round>, got: " + text);
  webparf::KillSpec kill;
  try {
    kill.worker = std::stoi(text.substr(0, at));
    kill.round = std::stoi(text.substr(at + 1));
  } catch (const std::exception&) {
    throw webparf::ParseError("--kill-worker expects integers in <worker>@<round>, got: " + text);
  }
  return kill;
}

nlohmann::json load_json_arg(const std::string& arg, const char* what) {
  if (!arg.empty() && arg.front() == '{') return nlohmann::json::parse(arg);
  std::ifstream in(arg);
  if (!in) throw webparf::ConfigError(std::string(what) + " file not found: " + arg);
  return nlohmann::json::parse(in);
}

void apply_kill(webparf::Config& config, const std::string& kill_arg) {
  if (kill_arg.empty()) return;
  webparf::KillSpec kill = parse_kill(kill_arg);
  if (kill.worker < 0 || kill.worker >= config.workers)
    throw webparf::InvariantViolation("kill_worker.worker must name a configured worker");
  if (config.workers < 2)
    throw webparf::InvariantViolation("kill_worker needs at least two workers");
  config.kill_worker = kill;
}

int run_config(webparf::Config config) {
  webparf::HttpBackend http;
  webparf::FetchBackend* live =
      config.backend == webparf::BackendMode::live ? &http : nullptr;
  webparf::CrawlReport report = webparf::run_crawl(config, live);
  std::cout << webparf::report_json(report).dump(2) << std::endl;
  return 0;
}

void print_metrics(const nlohmann::json& report) {
  auto line = [](const std::string& key, const nlohmann::json& value) {
    std::cout << "  " << key;
    for (std::size_t i = key.size(); i < 28; ++i) std::cout << ' ';
    std::cout << value.dump() << '\n';
  };
  std::cout << "crawl report\n";
  for (const char* key : {"stop_reason", "total_rounds", "pages_downloaded", "fetch_attempts",
                          "fetch_errors", "stored_pages", "url_overlap", "content_duplicates",
                          "discoveries", "duplicate_sightings", "malformed_urls", "flush_events",
                          "routed_delivered", "routed_deferred", "rebalance_events",
                          "misclassified", "coverage", "wall_time_ms"}) {
    if (report.contains(key)) line(key, report.at(key));
  }
  if (report.contains("per_domain_fetched")) {
    std::cout << "per-domain fetched\n";
    for (const auto& [domain, count] : report.at("per_domain_fetched").items())
      line(domain, count);
  }
  if (report.contains("frontier_residue")) {
    std::cout << "frontier residue\n";
    for (const auto& [domain, count] : report.at("frontier_residue").items())
      line(domain, count);
  }
  if (report.contains("worker_domains")) {
    std::cout << "domains per live worker\n";
    for (const auto& [worker, count] : report.at("worker_domains").items())
      line("worker " + worker, count);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"webparf: domain-partitioned parallel crawler"};
  app.require_subcommand(1);

  std::string config_path, kill_arg;
  auto* crawl = app.add_subcommand("crawl", "run a crawl from a config file");
  crawl->add_option("--config", config_path, "config JSON file")->required();
  crawl->add_option("--kill-worker", kill_arg, "inject a worker failure: <worker>@<round>");

  std::string graph_params_arg, graph_file_arg, dump_graph_arg, sim_kill_arg;
  int sim_workers = 0, sim_inbox = 16, sim_batch = 64, sim_politeness = 0;
  long long sim_max_pages = 0, sim_max_rounds = 0;
  double sim_alpha = 1.0, sim_beta = 0.5;
  auto* simulate = app.add_subcommand("simulate", "generate or load a synthetic web and crawl it");
  auto* gp = simulate->add_option("--graph-params", graph_params_arg,
                                  "graph params JSON (inline or a file path)");
  auto* gf = simulate->add_option("--graph-file", graph_file_arg, "saved web dump to load");
  gp->excludes(gf);
  simulate->add_option("--dump-graph", dump_graph_arg, "write the web dump to this file");
  simulate->add_option("--workers", sim_workers, "worker count (default: one per domain)");
  simulate->add_option("--inbox-capacity", sim_inbox, "per-worker inbox capacity");
  simulate->add_option("--batch-size", sim_batch, "dispatcher batch trigger size");
  simulate->add_option("--politeness-ms", sim_politeness, "per-host fetch spacing");
  simulate->add_option("--max-pages", sim_max_pages, "stop after this many downloads");
  simulate->add_option("--max-rounds", sim_max_rounds, "stop after this many rounds");
  simulate->add_option("--alpha", sim_alpha, "inlink weight of the relevance score");
  simulate->add_option("--beta", sim_beta, "request weight of the relevance score");
  simulate->add_option("--kill-worker", sim_kill_arg, "inject a worker failure: <worker>@<round>");

  std::string dump_config_path, dump_domain;
  auto* frontier_dump = app.add_subcommand("frontier-dump", "print a domain's queue as TSV");
  frontier_dump->add_option("--config", dump_config_path, "config JSON file")->required();
  frontier_dump->add_option("--domain", dump_domain, "domain to dump")->required();

  std::string report_path;
  auto* metrics = app.add_subcommand("metrics", "pretty-print a saved report JSON");
  metrics->add_option("--report", report_path, "report JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*crawl) {
      webparf::Config config = webparf::load_config(config_path);
      apply_kill(config, kill_arg);
      return run_config(std::move(config));
    }

    if (*simulate) {
      if (graph_params_arg.empty() && graph_file_arg.empty())
        throw webparf::ConfigError("simulate needs --graph-params or --graph-file");
      webparf::Config config;
      if (!graph_params_arg.empty()) {
        nlohmann::json j = load_json_arg(graph_params_arg, "graph params");
        webparf::GraphParams params = webparf::detail::graph_params_from_json(j);
        if (params.domains.empty())
          throw webparf::InvariantViolation("graph params need a domains list");
        config.domains = params.domains;
        config.graph = std::move(params);
      } else {
        std::ifstream in(graph_file_arg);
        if (!in) throw webparf::ConfigError("graph file not found: " + graph_file_arg);
        webparf::SyntheticWeb web = webparf::SyntheticWeb::from_json(nlohmann::json::parse(in));
        config.domains = web.profiles();
        config.graph_file = graph_file_arg;
      }
      config.workers = sim_workers > 0 ? sim_workers : static_cast<int>(config.domains.size());
      config.inbox_capacity = sim_inbox;
      config.batch_size = sim_batch;
      config.politeness_ms = sim_politeness;
      config.weights = {sim_alpha, sim_beta};
      if (sim_max_pages > 0) config.max_pages = sim_max_pages;
      if (sim_max_rounds > 0) config.max_rounds = sim_max_rounds;
      apply_kill(config, sim_kill_arg);

      if (!dump_graph_arg.empty() && config.graph) {
        std::ofstream out(dump_graph_arg);
        out << webparf::generate(*config.graph).to_json().dump(2) << '\n';
      }
      return run_config(std::move(config));
    }

    if (*frontier_dump) {
      webparf::Config config = webparf::load_config(dump_config_path);
      webparf::CrawlEngine engine(config);
      int rank = 1;
      for (const webparf::QueueNode& node : engine.frontier().snapshot(dump_domain))
        for (const std::string& url : node.urls)
          std::cout << dump_domain << '\t' << rank++ << '\t' << node.score << '\t' << url
                    << '\n';
      return 0;
    }

    if (*metrics) {
      std::ifstream in(report_path);
      if (!in) throw webparf::ConfigError("report file not found: " + report_path);
      print_metrics(nlohmann::json::parse(in));
      return 0;
    }
  } catch (const webparf::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const webparf::InvalidParamsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
