#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geomarket/geomarket.h"
#include "json.hpp"

using nlohmann::json;

namespace {

using Command = gm_status (*)(const char*, char**);

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

// Flags the user actually passed, applied on top of the config file.
class Overrides {
 public:
  template <typename T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    apply_.push_back([opt, value, key](json& cfg) {
      if (opt->count() > 0) cfg[key] = *value;
    });
  }
  void apply(json& cfg) const {
    for (const auto& f : apply_) f(cfg);
  }

 private:
  std::vector<std::function<void(json&)>> apply_;
};

struct Sub {
  CLI::App* app = nullptr;
  Overrides flags;
  std::string config_file;
  Command command = nullptr;
};

int run(Sub& sub, bool pretty) {
  json cfg = sub.config_file.empty() ? json::object() : load_json_file(sub.config_file);
  sub.flags.apply(cfg);
  char* out = nullptr;
  gm_status st = sub.command(cfg.dump().c_str(), &out);
  if (st != GM_OK) {
    std::cerr << "error: " << gm_status_name(st) << ": " << gm_last_error() << '\n';
    return 2;
  }
  json result = json::parse(out);
  gm_string_free(out);
  std::cout << (pretty ? result.dump(2) : result.dump()) << '\n';
  if (result.contains("ok") && result["ok"].is_boolean() && !result["ok"].get<bool>()) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geo-marketplace toolkit: dataset ingestion, benchmarks and scenario runs"};
  app.require_subcommand(1);
  app.fallthrough();
  bool pretty = false;
  app.add_flag("--pretty", pretty, "Indent JSON output");

  std::map<std::string, Sub> subs;
  auto make = [&](const std::string& name, const std::string& help, Command cmd) -> Sub& {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    s.command = cmd;
    s.app->add_option("-c,--config", s.config_file, "JSON configuration file; flags take precedence");
    return s;
  };

  Sub& ingest = make("ingest", "Load check-ins and write nested samples D1 < D2 < ...", gm_ingest);
  ingest.flags.add<std::string>(ingest.app, "-i,--input", "input", "Check-in CSV (synthetic data if omitted)");
  ingest.flags.add<std::string>(ingest.app, "-o,--out-dir", "out_dir", "Directory for the samples");
  ingest.flags.add<std::vector<std::size_t>>(ingest.app, "--sizes", "sizes", "Ascending sample sizes");
  ingest.flags.add<std::uint64_t>(ingest.app, "--seed", "seed", "Sampling seed");

  Sub& workload = make("workload", "Generate a query workload around dataset anchors", gm_workload);
  workload.flags.add<std::string>(workload.app, "-d,--dataset", "dataset", "Check-in CSV");
  workload.flags.add<std::size_t>(workload.app, "--synthetic", "synthetic", "Synthetic dataset size");
  workload.flags.add<unsigned>(workload.app, "-G,--log-side", "log_side", "log2 of the grid side L");
  workload.flags.add<unsigned>(workload.app, "--h-max", "h_max", "Query height limit");
  workload.flags.add<std::size_t>(workload.app, "-n,--count", "count", "Queries per range size");
  workload.flags.add<std::uint64_t>(workload.app, "--seed", "seed", "Seed");
  workload.flags.add<std::string>(workload.app, "-o,--out", "out", "Write the workload to this file");

  Sub& sse = make("bench-sse", "Index build, query and decomposition benchmark for SSE", gm_bench_sse);
  sse.flags.add<std::vector<unsigned>>(sse.app, "-G,--log-side", "log_sides", "log2 L values");
  sse.flags.add<std::vector<unsigned>>(sse.app, "--h-max", "h_max", "h_max values");
  sse.flags.add<std::vector<std::size_t>>(sse.app, "--sizes", "dataset_sizes", "Nested dataset sizes");
  sse.flags.add<std::size_t>(sse.app, "-q,--queries", "queries_per_size", "Queries per range size");
  sse.flags.add<unsigned>(sse.app, "--key-bits", "security_bits", "SSE security level (128 or 256)");
  sse.flags.add<std::uint64_t>(sse.app, "--seed", "seed", "Seed");
  sse.flags.add<std::string>(sse.app, "--checkins", "checkins", "Check-in CSV (synthetic if omitted)");

  Sub& hve = make("bench-hve", "Encryption, token and parallel matching benchmark for HVE", gm_bench_hve);
  hve.flags.add<std::vector<unsigned>>(hve.app, "--key-bits", "key_bits", "Group order sizes in bits");
  hve.flags.add<unsigned>(hve.app, "-G,--log-side", "log_side", "log2 L");
  hve.flags.add<unsigned>(hve.app, "--h-max", "h_max", "h_max");
  hve.flags.add<std::vector<unsigned>>(hve.app, "-w,--workers", "workers", "Worker counts");
  hve.flags.add<std::size_t>(hve.app, "--objects", "objects", "Flat file size");
  hve.flags.add<std::size_t>(hve.app, "-q,--queries", "queries", "Query tokens");
  hve.flags.add<std::size_t>(hve.app, "--repeats", "repeats", "Timing repeats per worker count");
  hve.flags.add<std::uint64_t>(hve.app, "--seed", "seed", "Seed");
  hve.flags.add<std::string>(hve.app, "--checkins", "checkins", "Check-in CSV (synthetic if omitted)");

  Sub& cost = make("bench-cost", "Gas and USD totals of the setup and purchase sequences", gm_bench_cost);
  cost.flags.add<std::size_t>(cost.app, "--owners", "owners", "Owners to register");
  cost.flags.add<std::size_t>(cost.app, "--purchases", "purchases", "Purchases to execute");
  cost.flags.add<double>(cost.app, "--gas-price-gwei", "gas_price_gwei", "Gas price");
  cost.flags.add<double>(cost.app, "--ether-usd", "ether_usd", "Ether exchange rate");
  cost.flags.add<std::uint64_t>(cost.app, "--seed", "seed", "Seed");

  for (Sub* s : {&sse, &hve, &cost}) {
    s->flags.add<std::string>(s->app, "-o,--out", "output_dir", "Report directory");
    s->flags.add<std::vector<std::string>>(s->app, "--format", "formats", "csv and/or json");
  }

  Sub& scenario = make("scenario", "Run a scripted marketplace scenario", gm_scenario);
  std::string script;
  scenario.app->add_option("script", script, "Scenario JSON file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (scenario.app->parsed()) {
      json s = load_json_file(script);
      if (!scenario.config_file.empty()) s["config"] = load_json_file(scenario.config_file);
      char* out = nullptr;
      gm_status st = gm_scenario(s.dump().c_str(), &out);
      if (st != GM_OK) {
        std::cerr << "error: " << gm_status_name(st) << ": " << gm_last_error() << '\n';
        return 2;
      }
      json result = json::parse(out);
      gm_string_free(out);
      std::cout << (pretty ? result.dump(2) : result.dump()) << '\n';
      return result.value("ok", false) ? 0 : 1;
    }
    for (auto& [name, sub] : subs) {
      if (sub.app->parsed()) return run(sub, pretty);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
