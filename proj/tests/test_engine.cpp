#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "autocompose/engine.hpp"
#include "temp_dir.hpp"

using namespace autocompose;
using testutil::TempDir;

namespace {

EngineOptions seeded_options(const TempDir& dir, int mine_every = 0) {
    EngineOptions opt;
    opt.transactions_path = dir.copy_fixture("transa.txt", "transa.txt");
    opt.config_path = dir.copy_fixture("config.txt", "config.txt");
    opt.catalog_path = testutil::fixture("catalog.txt");
    opt.trigger_log_path = dir.file("trigger.log");
    opt.rule_store_path = dir.file("rules.store");
    opt.mine_every = mine_every;
    return opt;
}

}  // namespace

TEST_CASE("trigger issues unique ids and audits the request") {
    TempDir dir;
    Engine engine(seeded_options(dir));
    engine.start();
    auto e1 = engine.trigger(Itemset{1, 2, 3, 4});
    auto e2 = engine.trigger(Itemset{1, 2});
    CHECK(e1.requested_items.size() == 4);
    CHECK(e1.event_id != e2.event_id);
    CHECK_THROWS_AS(engine.trigger(Itemset{}), ContractError);
    CHECK_THROWS_AS(engine.trigger(Itemset{7}), ContractError);

    TriggerLog log(dir.file("trigger.log"));
    CHECK(log.load().size() == 2);
    CHECK(log.find(e1.event_id).has_value());
}

TEST_CASE("processing appends completed requests to the transaction log") {
    TempDir dir;
    Engine engine(seeded_options(dir));
    engine.start();
    auto outcome = engine.process(Itemset{1, 6});
    CHECK(!outcome.failed);
    CHECK(outcome.total_cost == 900 + 110);
    auto [set, cfg] = load_dataset(dir.file("transa.txt"), dir.file("config.txt"));
    CHECK(cfg.transaction_count == 6);
    CHECK(set.transactions.back().items == Itemset{1, 6});
}

TEST_CASE("mining cycle installs the fixture composites once") {
    TempDir dir;
    Engine engine(seeded_options(dir));
    engine.start();
    CHECK(engine.dispatcher().registry_size() == 6);
    CHECK(engine.run_mining_cycle() == 4);
    CHECK(engine.dispatcher().registry_size() == 10);
    CHECK(engine.run_mining_cycle() == 0);  // idempotent on unchanged data
}

TEST_CASE("composite discovery reduces dispatches for a repeated basket") {
    TempDir dir;
    Engine engine(seeded_options(dir));
    engine.start();

    auto before = engine.process(Itemset{2, 3, 6});
    CHECK(before.sub_dispatch_count == 3);

    engine.run_mining_cycle();

    auto after = engine.process(Itemset{2, 3, 6});
    CHECK(after.sub_dispatch_count == 1);
    CHECK(after.total_cost == before.total_cost);  // same items, same bill
}

TEST_CASE("item outside every frequent itemset stays per-item") {
    TempDir dir;
    Engine engine(seeded_options(dir));
    engine.start();
    engine.run_mining_cycle();
    auto outcome = engine.process(Itemset{5});
    CHECK(!outcome.failed);
    CHECK(outcome.sub_dispatch_count == 1);
    CHECK(outcome.total_cost == 80);
    CHECK(outcome.served_by == std::vector<std::string>{"svc-5"});
}

TEST_CASE("mine-every cadence triggers mining automatically") {
    TempDir dir;
    Engine engine(seeded_options(dir, 3));
    engine.start();
    engine.process(Itemset{2, 3, 6});
    engine.process(Itemset{2, 3, 6});
    CHECK(engine.mining_cycles() == 0);
    engine.process(Itemset{2, 3, 6});
    CHECK(engine.mining_cycles() == 1);
    // 8 transactions at 40% support leave {2,3,6} as the one maximal itemset.
    CHECK(engine.composites_installed() == 1);
    CHECK(engine.dispatcher().has_handler("c-2-3-6"));
}

TEST_CASE("scenario replay produces the expected phase metrics") {
    TempDir dir;
    Engine engine(seeded_options(dir));
    engine.start();
    auto steps = load_scenario(testutil::fixture("scenario_replay.txt"));
    REQUIRE(steps.size() == 11);  // 5 baskets, checkpoint, 5 baskets

    std::ostringstream report;
    run_scenario(engine, steps, report, 7);
    std::string text = report.str();

    CHECK(text.find("requests_served\t10") != std::string::npos);
    CHECK(text.find("composites_installed\t4") != std::string::npos);
    CHECK(text.find("mining_cycles\t1") != std::string::npos);

    // Phase totals: replayed baskets ride the new composites.
    int phase1 = 0, phase2 = 0;
    for (const auto& m : engine.metrics())
        (m.phase == 1 ? phase1 : phase2) += m.sub_dispatch_count;
    CHECK(phase1 == 4 + 2 + 4 + 4 + 4);
    CHECK(phase2 < phase1);
}

TEST_CASE("scenario reports are deterministic apart from wall-clock lines") {
    auto strip_timing = [](const std::string& text) {
        std::istringstream in(text);
        std::string line, out;
        while (std::getline(in, line))
            if (line.find("generated_at") == std::string::npos &&
                line.find("latency") == std::string::npos)
                out += line + "\n";
        return out;
    };

    std::string runs[2];
    for (int run = 0; run < 2; ++run) {
        TempDir dir;
        Engine engine(seeded_options(dir));
        engine.start();
        auto steps = load_scenario(testutil::fixture("scenario_replay.txt"));
        std::ostringstream report;
        run_scenario(engine, steps, report, 7);
        runs[run] = strip_timing(report.str());
    }
    CHECK(runs[0] == runs[1]);
}

TEST_CASE("empty scenario yields a zero-request report") {
    TempDir dir;
    Engine engine(seeded_options(dir));
    engine.start();
    std::ostringstream report;
    run_scenario(engine, {}, report, 0);
    CHECK(report.str().find("requests_served\t0") != std::string::npos);
}

TEST_CASE("malformed scenario line names its line number") {
    TempDir dir;
    auto path = dir.write("scenario.txt", "1,2\nbogus\n");
    try {
        load_scenario(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 2);
    }
}
