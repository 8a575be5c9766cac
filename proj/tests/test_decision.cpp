#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "autocompose/decision.hpp"
#include "temp_dir.hpp"

using namespace autocompose;

namespace {

ServiceEvent make_event(const Itemset& items, const std::string& id = "e1") {
    return {id, items, 0};
}

RegistryView local_registry(int universe, std::set<Itemset> composites = {}) {
    RegistryView view;
    for (int i = 1; i <= universe; ++i) view.local_services.insert(per_item_service_id(i));
    for (const auto& c : composites) {
        view.local_services.insert(composite_service_id(c));
        view.composite_itemsets.insert(c);
    }
    return view;
}

}  // namespace

TEST_CASE("multi-item event without composite goes to the bundle rule") {
    auto rules = default_fixed_rules();
    auto view = local_registry(6);
    CHECK(match_rule(make_event(Itemset{1, 2, 3, 4}), rules, view).plan_kind ==
          PlanKind::Bundle);
    CHECK(match_rule(make_event(Itemset{1, 2}), rules, view).plan_kind == PlanKind::Bundle);
}

TEST_CASE("single-item event gets the per-item catch-all") {
    auto rules = default_fixed_rules();
    auto view = local_registry(6);
    CHECK(match_rule(make_event(Itemset{5}), rules, view).plan_kind == PlanKind::PerItem);
}

TEST_CASE("registered covering composite wins the match") {
    auto rules = default_fixed_rules();
    auto view = local_registry(6, {Itemset{1, 2, 3}});
    auto rule = match_rule(make_event(Itemset{1, 2, 3}), rules, view);
    CHECK(rule.plan_kind == PlanKind::Composite);
    // A subset request is also covered.
    CHECK(match_rule(make_event(Itemset{1, 3}), rules, view).plan_kind == PlanKind::Composite);
    // An uncovered request is not.
    CHECK(match_rule(make_event(Itemset{1, 4}), rules, view).plan_kind == PlanKind::Bundle);
}

TEST_CASE("select_plan picks the smallest covering composite, lexicographic ties") {
    auto view = local_registry(6, {Itemset{1, 2, 3}, Itemset{2, 3, 6}});
    auto rules = default_fixed_rules();
    auto event = make_event(Itemset{2, 3});
    auto rule = match_rule(event, rules, view);
    REQUIRE(rule.plan_kind == PlanKind::Composite);
    auto plan = select_plan(rule, event, view);
    REQUIRE(plan.target_services.size() == 1);
    CHECK(plan.target_services[0] == "c-1-2-3");  // equal size, {1,2,3} < {2,3,6}
}

TEST_CASE("per-item plan names one target per item") {
    auto view = local_registry(6);
    FixedRule rule{"per-item", 1, kMaxUniverse, Itemset{}, PlanKind::PerItem, 0};
    auto plan = select_plan(rule, make_event(Itemset{1, 6}), view);
    REQUIRE(plan.target_services.size() == 2);
    CHECK(plan.target_services[0] == "svc-1");
    CHECK(plan.target_services[1] == "svc-6");
    CHECK(plan.locality == Locality::Local);
}

TEST_CASE("bundle locality follows per-item services") {
    FixedRule rule{"bundle", 2, kMaxUniverse, Itemset{}, PlanKind::Bundle, 10};
    auto local = local_registry(6);
    CHECK(select_plan(rule, make_event(Itemset{1, 2}), local).locality == Locality::Local);

    RegistryView partial;
    partial.local_services.insert(per_item_service_id(1));  // svc-2 missing
    CHECK(select_plan(rule, make_event(Itemset{1, 2}), partial).locality == Locality::Remote);
}

TEST_CASE("composite rule with vanished composite is an inconsistency") {
    FixedRule rule{"composite", 2, kMaxUniverse, Itemset{}, PlanKind::Composite, 5};
    RegistryView empty;
    CHECK_THROWS_AS(select_plan(rule, make_event(Itemset{1, 2}), empty), ContractError);
}

TEST_CASE("match is total with the catch-all present") {
    auto rules = default_fixed_rules();
    RegistryView empty;
    for (int n = 1; n <= 6; ++n) {
        Itemset items;
        for (int i = 1; i <= n; ++i) items.insert(i);
        CHECK_NOTHROW(match_rule(make_event(items), rules, empty));
    }
    CHECK_THROWS_AS(match_rule(make_event(Itemset{1}), {}, empty), ContractError);
}

TEST_CASE("scaling priorities does not change the selection") {
    auto rules = default_fixed_rules();
    auto scaled = rules;
    for (auto& r : scaled) r.priority *= 17;
    auto view = local_registry(6, {Itemset{2, 3, 6}});
    for (const auto& items : {Itemset{5}, Itemset{1, 2}, Itemset{2, 3}, Itemset{2, 3, 6}}) {
        auto a = match_rule(make_event(items), rules, view);
        auto b = match_rule(make_event(items), scaled, view);
        CHECK(a.rule_id == b.rule_id);
    }
}

TEST_CASE("plan targets cover the request") {
    auto rules = default_fixed_rules();
    auto view = local_registry(6, {Itemset{1, 2, 3}});
    for (const auto& items : {Itemset{4}, Itemset{1, 2}, Itemset{4, 5, 6}}) {
        auto event = make_event(items);
        auto rule = match_rule(event, rules, view);
        auto plan = select_plan(rule, event, view);
        if (plan.kind == PlanKind::Composite) {
            // Single composite target; its itemset covers the request.
            REQUIRE(plan.target_services.size() == 1);
            CHECK(plan.target_services[0] == composite_service_id(Itemset{1, 2, 3}));
        } else if (plan.kind == PlanKind::PerItem) {
            CHECK(plan.target_services.size() == static_cast<std::size_t>(items.size()));
        }
    }
}

TEST_CASE("registering a covering composite upgrades, never downgrades") {
    auto rules = default_fixed_rules();
    auto event = make_event(Itemset{2, 3});
    auto before = match_rule(event, rules, local_registry(6));
    CHECK(before.plan_kind == PlanKind::Bundle);
    auto after = match_rule(event, rules, local_registry(6, {Itemset{2, 3, 6}}));
    CHECK(after.plan_kind == PlanKind::Composite);
}

TEST_CASE("required-subset overlap raises specificity") {
    std::vector<FixedRule> rules = default_fixed_rules();
    rules.push_back({"printer-promo", 1, kMaxUniverse, Itemset{4}, PlanKind::Bundle, 1});
    auto view = local_registry(6);
    CHECK(match_rule(make_event(Itemset{3, 4}), rules, view).rule_id == "printer-promo");
    CHECK(match_rule(make_event(Itemset{1, 2}), rules, view).rule_id == "bundle");
}

TEST_CASE("fixed rules load from file") {
    testutil::TempDir dir;
    auto path = dir.write("rules.txt",
                          "# id min max kind priority\n"
                          "composite 2 64 Composite 5\n"
                          "bundle 2 64 Bundle 10\n"
                          "per-item 1 64 PerItem 0\n");
    auto rules = load_fixed_rules(path);
    REQUIRE(rules.size() == 3);
    CHECK(rules[0].plan_kind == PlanKind::Composite);
    CHECK(rules[1].priority == 10);

    auto bad = dir.write("bad.txt", "x 3 2 Bundle 1\n");
    CHECK_THROWS_AS(load_fixed_rules(bad), ParseError);
    auto bad_kind = dir.write("badkind.txt", "x 1 2 Fancy 1\n");
    CHECK_THROWS_AS(load_fixed_rules(bad_kind), ParseError);
}
