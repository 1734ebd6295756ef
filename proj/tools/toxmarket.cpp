#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "CLI11.hpp"
#include "toxmarket/api.hpp"
#include "toxmarket/combinatorial.hpp"
#include "toxmarket/error.hpp"
#include "toxmarket/http_server.hpp"
#include "toxmarket/optimizer.hpp"
#include "toxmarket/service.hpp"
#include "toxmarket/settlement.hpp"
#include "toxmarket/simulator.hpp"

using namespace toxmarket;
using nlohmann::json;

namespace {

constexpr const char* kLocalOperator = "local-operator";

struct StateOptions {
  std::string config;
  std::string journal;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "Service config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--journal", journal, "Event journal path (overrides the config)");
  }

  ServiceConfig load(bool require_journal = true) const {
    ServiceConfig c;
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) fail(ErrorKind::io, "cannot read config '" + config + "'");
      c = parse_service_config(in);
    }
    apply_env_overrides(c, [](const char* name) { return std::getenv(name); });
    if (!journal.empty()) c.journal_path = journal;
    if (require_journal && c.journal_path.empty()) {
      fail(ErrorKind::invalid_argument, "no journal: pass --journal or a config with journal_path");
    }
    if (c.admin_token.empty()) c.admin_token = kLocalOperator;
    return c;
  }
};

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
  return out;
}

Caller operator_caller() { return Caller{true, {}}; }

int run_serve(const StateOptions& state) {
  ServiceConfig cfg = state.load(false);
  if (cfg.admin_token == kLocalOperator) {
    fail(ErrorKind::invalid_argument, "serve needs admin_token in the config or TOXMARKET_ADMIN_TOKEN");
  }
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(cfg);
  Api api(service);
  HttpServer server(api);
  const int port = server.bind(cfg.host, cfg.port);
  std::cerr << "toxmarket listening on " << cfg.host << ':' << port << " ("
            << service.event_count() << " events replayed)\n";
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  waiter.detach();
  server.listen();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prediction-market exchange for impaired-asset transfer prices"};
  app.require_subcommand(1);

  // serve
  StateOptions serve_state;
  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON service");
  serve_state.attach(serve);

  // ingest
  StateOptions ingest_state;
  std::string ingest_file;
  auto* ingest = app.add_subcommand("ingest", "Load assets from a CSV file");
  ingest->add_option("file", ingest_file, "Asset CSV")->required()->check(CLI::ExistingFile);
  ingest_state.attach(ingest);

  // create-market
  StateOptions cm_state;
  std::string cm_asset;
  std::int64_t cm_threshold = 0;
  std::int64_t cm_cutoff = 0;
  std::optional<double> cm_b;
  auto* create_market = app.add_subcommand("create-market", "Open a binary market on an asset");
  create_market->add_option("--asset", cm_asset)->required();
  create_market->add_option("--threshold-cents", cm_threshold)->required();
  create_market->add_option("--cutoff", cm_cutoff, "Cutoff, epoch seconds")->required();
  create_market->add_option("--b", cm_b, "Liquidity parameter");
  cm_state.attach(create_market);

  // open-account / credit
  StateOptions oa_state;
  std::optional<std::string> oa_id;
  auto* open_account = app.add_subcommand("open-account", "Open an attested participant account");
  open_account->add_option("--id", oa_id);
  oa_state.attach(open_account);

  StateOptions cr_state;
  std::string cr_id;
  std::int64_t cr_amount = 0;
  auto* credit = app.add_subcommand("credit", "Top up an account");
  credit->add_option("account", cr_id)->required();
  credit->add_option("--amount-cents", cr_amount)->required();
  cr_state.attach(credit);

  // halt / settle
  StateOptions halt_state;
  std::string halt_id;
  auto* halt = app.add_subcommand("halt", "Stop trading in a market ahead of its cutoff");
  halt->add_option("market_id", halt_id)->required();
  halt_state.attach(halt);

  StateOptions settle_state;
  std::string settle_id;
  std::optional<std::int64_t> settle_price;
  std::string settle_out;
  auto* settle = app.add_subcommand("settle", "Resolve a market and pay winning positions");
  settle->add_option("market_id", settle_id)->required();
  settle->add_option("--announced-cents", settle_price, "Announced transfer price (binary markets)");
  settle->add_option("--out", settle_out, "Write the settlement report CSV here");
  settle_state.attach(settle);

  // propose-pairs
  StateOptions pp_state;
  double pp_radius = 0.0;
  std::size_t pp_max = 10;
  auto* pairs = app.add_subcommand("propose-pairs", "Suggest nearby asset pairs for joint markets");
  pairs->add_option("--radius-km", pp_radius)->required()->check(CLI::NonNegativeNumber);
  pairs->add_option("--max", pp_max);
  pp_state.attach(pairs);

  // optimize
  std::string opt_file;
  std::int64_t opt_ms = 10'000;
  std::string opt_model;
  auto* optimize = app.add_subcommand("optimize", "Select a basket of assets under a budget");
  optimize->add_option("instance", opt_file)->required()->check(CLI::ExistingFile);
  optimize->add_option("--time-limit-ms", opt_ms)->check(CLI::NonNegativeNumber);
  optimize->add_option("--export-model", opt_model, "Write the linearized model here");

  // simulate
  std::string sim_config;
  std::optional<std::uint64_t> sim_seed;
  std::optional<int> shock_round;
  std::optional<std::int64_t> new_price;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Run an agent-based market session");
  simulate->add_option("--config", sim_config, "Simulator config (JSON)")->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim_seed);
  auto* sr = simulate->add_option("--shock-round", shock_round);
  auto* np = simulate->add_option("--new-price", new_price, "New true price, cents");
  sr->needs(np);
  np->needs(sr);
  simulate->add_option("--out", sim_out, "Write metrics here instead of stdout");

  // trades export
  StateOptions tr_state;
  std::string tr_out;
  auto* trades = app.add_subcommand("trades", "Trade log tools");
  auto* trades_export = trades->add_subcommand("export", "Write the trade log as CSV");
  trades_export->add_option("--out", tr_out);
  tr_state.attach(trades_export);
  trades->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return run_serve(serve_state);

    if (*ingest) {
      Service svc(ingest_state.load());
      const json rep = svc.ingest_assets(operator_caller(), read_all(ingest_file));
      std::cout << "accepted " << rep["accepted"] << ", rejected " << rep["rejected"].size() << '\n';
      for (const auto& r : rep["rejected"]) {
        std::cerr << "line " << r["line"] << ": " << r["reason"].get<std::string>() << '\n';
      }
      return rep["rejected"].empty() ? 0 : 3;
    }
    if (*create_market) {
      Service svc(cm_state.load());
      std::cout << svc.create_market(operator_caller(), cm_asset, Cents{cm_threshold}, cm_b,
                                     from_epoch_seconds(cm_cutoff))
                       .dump(2)
                << '\n';
      return 0;
    }
    if (*open_account) {
      Service svc(oa_state.load());
      std::cout << svc.open_account(operator_caller(), oa_id, true).dump(2) << '\n';
      return 0;
    }
    if (*credit) {
      Service svc(cr_state.load());
      std::cout << svc.credit(operator_caller(), cr_id, Cents{cr_amount}).dump(2) << '\n';
      return 0;
    }
    if (*halt) {
      Service svc(halt_state.load());
      std::cout << svc.halt(operator_caller(), halt_id).dump(2) << '\n';
      return 0;
    }
    if (*settle) {
      Service svc(settle_state.load());
      std::optional<Cents> price;
      if (settle_price) price = Cents{*settle_price};
      const json rep = svc.settle(operator_caller(), settle_id, price);
      SettlementReport report;
      report.market_id = rep["market_id"];
      for (const auto& l : rep["lines"]) {
        report.lines.push_back({report.market_id, l["account_id"], l["outcome"], l["shares"],
                                Cents{l["payout_cents"].get<std::int64_t>()}});
      }
      if (settle_out.empty()) {
        export_settlement_csv(report, std::cout);
      } else {
        auto out = open_out(settle_out);
        export_settlement_csv(report, out);
      }
      std::cerr << "winning outcome " << rep["winning_outcome"].get<std::string>() << '\n';
      return 0;
    }
    if (*pairs) {
      Service svc(pp_state.load());
      std::cout << "asset_a,asset_b,distance_km\n";
      for (const PairProposal& p : propose_pairs(svc.exchange(), pp_radius, pp_max)) {
        std::cout << p.asset_a << ',' << p.asset_b << ',' << p.distance_km << '\n';
      }
      return 0;
    }
    if (*optimize) {
      std::ifstream in(opt_file);
      const optimizer::BasketInstance inst = optimizer::parse_instance(in);
      if (!opt_model.empty()) {
        auto out = open_out(opt_model);
        out << optimizer::build_model(inst).to_text();
      }
      const auto sol = optimizer::optimize_basket(inst, std::chrono::milliseconds(opt_ms));
      std::cout << "proof," << (sol.proof == optimizer::Proof::optimal ? "OPTIMAL" : "BOUND_GAP") << '\n'
                << "objective_cents," << sol.objective << '\n'
                << "spend_cents," << sol.spend << '\n'
                << "gap_cents," << sol.gap << '\n'
                << "nodes," << sol.nodes << '\n'
                << "selected";
      for (std::size_t i : sol.selected) std::cout << ',' << i;
      std::cout << '\n';
      return 0;
    }
    if (*simulate) {
      sim::SimConfig cfg;
      if (!sim_config.empty()) {
        std::ifstream in(sim_config);
        cfg = sim::parse_config(in);
      }
      if (sim_seed) cfg.seed = *sim_seed;
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!sim_out.empty()) {
        file = open_out(sim_out);
        out = &file;
      }
      if (shock_round) {
        const auto m = sim::shock_session(cfg, {*shock_round, Cents{*new_price}});
        sim::export_metrics(m, *out);
      } else if (cfg.n_manipulators > 0) {
        const auto rep = sim::manipulation_experiment(cfg);
        sim::export_metrics(rep.treatment, *out, &rep);
      } else {
        sim::export_metrics(sim::run_session(cfg), *out);
      }
      return 0;
    }
    if (*trades_export) {
      Service svc(tr_state.load());
      if (tr_out.empty()) {
        export_trades_csv(svc.exchange().trades(), std::cout);
      } else {
        auto out = open_out(tr_out);
        export_trades_csv(svc.exchange().trades(), out);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == ErrorKind::invalid_argument ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
