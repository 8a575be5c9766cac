#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "autocompose/engine.hpp"
#include "autocompose/transport.hpp"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop = true; }

void write_mining_report(std::ostream& out, const autocompose::FrequentItemsetTable& table,
                         const std::vector<autocompose::AssociationRule>& rules) {
    for (const auto& [k, level] : table.levels) {
        out << "F" << k << " (" << level.size() << " itemsets)\n";
        for (const auto& f : level)
            out << "  {" << f.items.to_string() << "} support " << f.support_count << "\n";
    }
    if (table.levels.empty()) out << "no frequent itemsets\n";
    out << "F" << (table.max_level() + 1) << " (0 itemsets)\n";
    out << "rules (" << rules.size() << ")\n";
    for (const auto& r : rules)
        out << "  {" << r.antecedent.to_string() << "} => {" << r.consequent.to_string()
            << "} support " << r.support_count << " confidence " << r.confidence << "\n";
}

int cmd_mine(const std::string& transactions, const std::string& config,
             const std::string& output) {
    auto [set, cfg] = autocompose::load_dataset(transactions, config);
    auto table = autocompose::frequent_itemsets(set, cfg);
    auto rules = autocompose::generate_rules(table, cfg);
    if (output.empty() || output == "-") {
        write_mining_report(std::cout, table, rules);
    } else {
        std::ofstream out(output, std::ios::trunc);
        if (!out) throw autocompose::StorageError("cannot write report: " + output);
        write_mining_report(out, table, rules);
    }
    return 0;
}

autocompose::EngineOptions make_options(const std::string& transactions,
                                        const std::string& config, const std::string& catalog,
                                        const std::string& rules, const std::string& trigger_log,
                                        const std::string& rule_store, int mine_every,
                                        unsigned seed) {
    autocompose::EngineOptions opt;
    opt.transactions_path = transactions;
    opt.config_path = config;
    opt.catalog_path = catalog;
    opt.rules_path = rules;
    opt.trigger_log_path = trigger_log;
    opt.rule_store_path = rule_store;
    opt.mine_every = mine_every;
    opt.seed = seed;
    return opt;
}

int cmd_serve(const autocompose::EngineOptions& options, const std::string& endpoint,
              const std::string& scenario_path) {
    autocompose::Engine engine(options);
    engine.start();
    std::mutex engine_mutex;

    autocompose::PeerServer server;
    if (!endpoint.empty()) {
        server.start(endpoint, [&](const autocompose::RemoteRequest& req) {
            std::lock_guard lock(engine_mutex);
            try {
                auto outcome = engine.process(req.items, "remote:" + req.service_id);
                if (outcome.failed) return autocompose::RemoteResponse::error(outcome.error);
                return autocompose::RemoteResponse::ok(outcome.total_cost);
            } catch (const std::exception& e) {
                return autocompose::RemoteResponse::error(e.what());
            }
        });
        std::cerr << "listening on " << endpoint << "\n";
    }

    if (!scenario_path.empty()) {
        auto steps = autocompose::load_scenario(scenario_path);
        std::lock_guard lock(engine_mutex);
        for (const auto& step : steps) {
            if (step.checkpoint) {
                int n = engine.run_mining_cycle();
                std::cout << "mining checkpoint: " << n << " composites installed\n";
            } else {
                auto outcome = engine.process(step.items, "scenario");
                std::cout << outcome.event_id << " items {" << step.items.to_string()
                          << "} cost " << outcome.total_cost << " dispatches "
                          << outcome.sub_dispatch_count << (outcome.failed ? " FAILED" : "")
                          << "\n";
            }
        }
    }

    if (!endpoint.empty()) {
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
        server.stop();
    }
    return 0;
}

int cmd_simulate(const autocompose::EngineOptions& options, const std::string& scenario_path,
                 const std::string& report_path) {
    autocompose::Engine engine(options);
    engine.start();
    auto steps = autocompose::load_scenario(scenario_path);
    if (report_path.empty() || report_path == "-") {
        autocompose::run_scenario(engine, steps, std::cout, options.seed);
    } else {
        std::ofstream out(report_path, std::ios::trunc);
        if (!out) throw autocompose::StorageError("cannot write report: " + report_path);
        autocompose::run_scenario(engine, steps, out, options.seed);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-adaptive service composition engine"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string transactions = "transa.txt";
    std::string config = "config.txt";
    std::string catalog = "catalog.txt";
    std::string rules;
    std::string trigger_log = "trigger.log";
    std::string rule_store = "rules.store";
    std::string endpoint;
    std::string scenario;
    std::string report;
    int mine_every = 25;
    unsigned seed = 0;

    app.add_option("--transactions", transactions, "transaction matrix file");
    app.add_option("--config", config, "mining config file");
    app.add_option("--catalog", catalog, "item price catalog file");
    app.add_option("--rules", rules, "fixed rules file (default: built-in rules)");
    app.add_option("--trigger-log", trigger_log, "trigger audit log file");
    app.add_option("--rule-store", rule_store, "discovered rule store file");
    app.add_option("--endpoint", endpoint, "AC1 endpoint (host:port or loopback)");
    app.add_option("--mine-every", mine_every, "mining cadence in completed requests");
    app.add_option("--seed", seed, "simulation seed");
    app.add_option("--report", report, "report output path ('-' = stdout)");

    auto* mine = app.add_subcommand("mine", "mine frequent itemsets and rules");
    auto* serve = app.add_subcommand("serve", "run the service engine");
    serve->add_option("--scenario", scenario, "scripted scenario file");
    auto* simulate = app.add_subcommand("simulate", "replay a scenario, emit metrics");
    simulate->add_option("--scenario", scenario, "scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        auto options = make_options(transactions, config, catalog, rules, trigger_log,
                                    rule_store, mine_every, seed);
        if (mine->parsed()) return cmd_mine(transactions, config, report);
        if (serve->parsed()) return cmd_serve(options, endpoint, scenario);
        if (simulate->parsed()) return cmd_simulate(options, scenario, report);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
