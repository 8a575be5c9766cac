#pragma once

#include <chrono>

#include "autocompose/composer.hpp"
#include "autocompose/dispatcher.hpp"
#include "autocompose/mining.hpp"
#include "autocompose/repository.hpp"

namespace autocompose {

struct EngineOptions {
    std::string transactions_path;
    std::string config_path;
    std::string catalog_path;
    std::string trigger_log_path;
    std::string rule_store_path;
    std::string rules_path;     // empty = compiled-in defaults
    int mine_every = 25;        // completed requests per mining cycle
    unsigned seed = 0;
};

struct RequestMetric {
    std::string event_id;
    Itemset items;
    int sub_dispatch_count = 0;
    PlanKind plan_kind = PlanKind::PerItem;
    bool failed = false;
    long long latency_us = 0;
    int phase = 1;  // incremented at each mining checkpoint
};

// The full autonomic loop: serve -> log -> mine -> compose -> register.
class Engine {
public:
    explicit Engine(EngineOptions options)
        : options_(std::move(options)),
          dataset_(options_.transactions_path, options_.config_path),
          trigger_log_(options_.trigger_log_path),
          dispatcher_(options_.rules_path.empty() ? default_fixed_rules()
                                                  : load_fixed_rules(options_.rules_path)),
          catalog_(load_catalog(options_.catalog_path)),
          composer_(dispatcher_, catalog_, RuleStore(options_.rule_store_path)) {}

    // Registers one cost-quoting handler per catalog item.
    void start() {
        MiningConfig cfg = load_config(options_.config_path);
        universe_size_ = cfg.universe_size;
        // Continue the event id sequence across restarts of the same log.
        event_counter_ = static_cast<int>(trigger_log_.load().size());
        for (int i = 1; i <= universe_size_; ++i) {
            HandlerRegistration reg;
            reg.service_id = per_item_service_id(i);
            reg.handled_itemset = Itemset::single(i);
            long long price = catalog_.price_of(i);
            reg.handler = [price](const ServiceEvent& event, const Plan&) {
                ServiceOutcome r;
                r.event_id = event.event_id;
                r.total_cost = price;
                r.sub_dispatch_count = 1;
                return r;
            };
            dispatcher_.register_handler(std::move(reg));
        }
    }

    // The trigger participant: fresh event id, audit record, forward.
    ServiceEvent trigger(const Itemset& requested_items, const std::string& cause = "request") {
        if (requested_items.empty()) throw ContractError("empty service request");
        if (requested_items.max_item() > universe_size_)
            throw ContractError("request contains unknown item");
        ServiceEvent event;
        event.event_id = "e" + std::to_string(++event_counter_);
        event.requested_items = requested_items;
        event.received_at = now_seconds();
        trigger_log_.record({event.event_id, requested_items, event.received_at, cause});
        return event;
    }

    // Serves one request end to end and logs the completed purchase.
    ServiceOutcome process(const Itemset& requested_items, const std::string& cause = "request") {
        ServiceEvent event = trigger(requested_items, cause);
        auto t0 = std::chrono::steady_clock::now();
        dispatcher_.submit(event);
        std::optional<ServiceOutcome> outcome = dispatcher_.dispatch_next();
        auto t1 = std::chrono::steady_clock::now();
        if (!outcome) throw ContractError("dispatcher shut down mid-request");

        RequestMetric metric;
        metric.event_id = event.event_id;
        metric.items = requested_items;
        metric.sub_dispatch_count = outcome->sub_dispatch_count;
        metric.failed = outcome->failed;
        metric.latency_us =
            std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
        metric.phase = phase_;
        metrics_.push_back(metric);

        if (!outcome->failed) {
            dataset_.append_transaction({requested_items, 0});
            ++completed_requests_;
            if (options_.mine_every > 0 && completed_requests_ % options_.mine_every == 0)
                run_mining_cycle();
        }
        return *outcome;
    }

    // Mines the transaction log and installs any newly discovered
    // composites. Returns the number installed.
    int run_mining_cycle() {
        auto [transactions, cfg] = dataset_.load();
        FrequentItemsetTable table = frequent_itemsets(transactions, cfg);
        std::vector<AssociationRule> rules = generate_rules(table, cfg);
        RegistryView view = dispatcher_.registry_view();
        std::vector<CompositeService> fresh =
            synthesize_composites(rules, table, view.composite_itemsets);
        int installed = composer_.install(fresh);
        composites_installed_ += installed;
        ++mining_cycles_;
        ++phase_;
        return installed;
    }

    Dispatcher& dispatcher() { return dispatcher_; }
    const PriceCatalog& catalog() const { return catalog_; }
    const std::vector<RequestMetric>& metrics() const { return metrics_; }
    int composites_installed() const { return composites_installed_; }
    int mining_cycles() const { return mining_cycles_; }
    int completed_requests() const { return completed_requests_; }
    int current_phase() const { return phase_; }
    int universe_size() const { return universe_size_; }

private:
    static std::int64_t now_seconds() {
        return std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }

    EngineOptions options_;
    DatasetStore dataset_;
    TriggerLog trigger_log_;
    Dispatcher dispatcher_;
    PriceCatalog catalog_;
    Composer composer_;
    int universe_size_ = 0;
    int event_counter_ = 0;
    int completed_requests_ = 0;
    int composites_installed_ = 0;
    int mining_cycles_ = 0;
    int phase_ = 1;
    std::vector<RequestMetric> metrics_;
};

// Scenario file: one request per line (comma-separated item indices);
// a blank line is a mining checkpoint.
struct ScenarioStep {
    bool checkpoint = false;
    Itemset items;
};

inline std::vector<ScenarioStep> load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open scenario file: " + path);
    std::vector<ScenarioStep> steps;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::rstrip(line);
        if (line.empty()) {
            steps.push_back({true, Itemset{}});
            continue;
        }
        try {
            steps.push_back({false, parse_itemset_csv(line)});
        } catch (const std::exception& e) {
            throw ParseError(std::string("scenario: ") + e.what(), lineno);
        }
    }
    return steps;
}

// Replays a scenario and writes the metrics report: one "name<TAB>value"
// line per metric. Lines named *_at or *latency* carry wall-clock data.
inline void run_scenario(Engine& engine, const std::vector<ScenarioStep>& steps,
                         std::ostream& report, unsigned seed) {
    for (const auto& step : steps) {
        if (step.checkpoint)
            engine.run_mining_cycle();
        else
            engine.process(step.items, "scenario");
    }

    const auto& metrics = engine.metrics();
    report << "generated_at\t"
           << std::chrono::duration_cast<std::chrono::seconds>(
                  std::chrono::system_clock::now().time_since_epoch())
                  .count()
           << '\n';
    report << "seed\t" << seed << '\n';
    report << "requests_served\t" << metrics.size() << '\n';
    report << "requests_completed\t" << engine.completed_requests() << '\n';
    report << "mining_cycles\t" << engine.mining_cycles() << '\n';
    report << "composites_installed\t" << engine.composites_installed() << '\n';

    std::map<int, int> phase_requests, phase_sub_dispatches;
    long long latency_total = 0;
    for (const auto& m : metrics) {
        phase_requests[m.phase] += 1;
        phase_sub_dispatches[m.phase] += m.sub_dispatch_count;
        latency_total += m.latency_us;
    }
    for (const auto& [phase, count] : phase_requests) {
        report << "phase_" << phase << "_requests\t" << count << '\n';
        report << "phase_" << phase << "_sub_dispatches\t" << phase_sub_dispatches[phase]
               << '\n';
    }
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        report << "request_" << (i + 1) << "_items\t" << metrics[i].items.to_string() << '\n';
        report << "request_" << (i + 1) << "_sub_dispatch_count\t"
               << metrics[i].sub_dispatch_count << '\n';
    }
    report << "mean_dispatch_latency_us\t"
           << (metrics.empty() ? 0 : latency_total / static_cast<long long>(metrics.size()))
           << '\n';
}

}  // namespace autocompose
