#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "autocompose/itemset.hpp"

namespace autocompose {

enum class PlanKind { PerItem, Bundle, Composite };
enum class Locality { Local, Remote };

inline const char* to_string(PlanKind k) {
    switch (k) {
        case PlanKind::PerItem: return "PerItem";
        case PlanKind::Bundle: return "Bundle";
        case PlanKind::Composite: return "Composite";
    }
    return "?";
}

struct ServiceEvent {
    std::string event_id;
    Itemset requested_items;
    std::int64_t received_at = 0;
};

struct FixedRule {
    std::string rule_id;
    int min_items = 1;
    int max_items = kMaxUniverse;
    Itemset required_subset;  // empty = no requirement
    PlanKind plan_kind = PlanKind::PerItem;
    int priority = 0;
};

struct Plan {
    std::string plan_id;
    PlanKind kind = PlanKind::PerItem;
    std::vector<std::string> target_services;
    Locality locality = Locality::Local;
};

// What the decision logic needs to know about the dispatcher's registry:
// which composite itemsets are live and which service ids are local.
struct RegistryView {
    std::set<Itemset> composite_itemsets;
    std::set<std::string> local_services;

    bool is_local(const std::string& service_id) const {
        return local_services.contains(service_id);
    }
};

inline std::string per_item_service_id(ItemId i) { return "svc-" + std::to_string(i); }

inline std::string composite_service_id(const Itemset& s) { return "c-" + s.to_string('-'); }

// Default rule set: composite preferred when one covers the request,
// bundle for multi-item requests otherwise, per-item catch-all.
inline std::vector<FixedRule> default_fixed_rules() {
    return {
        {"composite", 2, kMaxUniverse, Itemset{}, PlanKind::Composite, 5},
        {"bundle", 2, kMaxUniverse, Itemset{}, PlanKind::Bundle, 10},
        {"per-item", 1, kMaxUniverse, Itemset{}, PlanKind::PerItem, 0},
    };
}

inline bool rule_satisfied(const FixedRule& rule, const ServiceEvent& event) {
    int n = event.requested_items.size();
    if (n < rule.min_items || n > rule.max_items) return false;
    return rule.required_subset.subset_of(event.requested_items);
}

inline bool composite_covers(const RegistryView& registry, const Itemset& request) {
    return std::any_of(registry.composite_itemsets.begin(), registry.composite_itemsets.end(),
                       [&](const Itemset& c) { return request.subset_of(c); });
}

// Picks the satisfied rule with the highest specificity score; ties broken
// by priority, then rule_id.
inline FixedRule match_rule(const ServiceEvent& event, const std::vector<FixedRule>& rules,
                            const RegistryView& registry) {
    if (rules.empty()) throw ContractError("match_rule: empty rule set");
    const bool covered = composite_covers(registry, event.requested_items);

    const FixedRule* best = nullptr;
    int best_score = -1;
    for (const auto& rule : rules) {
        if (!rule_satisfied(rule, event)) continue;
        int score = rule.required_subset.intersect(event.requested_items).size();
        if (rule.plan_kind == PlanKind::Composite && covered) score += 1000;
        bool better = false;
        if (score != best_score) {
            better = score > best_score;
        } else if (best) {
            if (rule.priority != best->priority)
                better = rule.priority > best->priority;
            else
                better = rule.rule_id < best->rule_id;
        }
        if (!best || better) {
            best = &rule;
            best_score = score;
        }
    }
    if (!best) throw ContractError("match_rule: no rule satisfied (missing catch-all)");
    return *best;
}

inline Plan select_plan(const FixedRule& rule, const ServiceEvent& event,
                        const RegistryView& registry) {
    Plan plan;
    plan.plan_id = "plan-" + event.event_id;
    plan.kind = rule.plan_kind;

    switch (rule.plan_kind) {
        case PlanKind::Composite: {
            // Smallest covering composite; ties by lexicographic itemset order.
            const Itemset* chosen = nullptr;
            for (const auto& c : registry.composite_itemsets) {
                if (!event.requested_items.subset_of(c)) continue;
                if (!chosen || c.size() < chosen->size() ||
                    (c.size() == chosen->size() && c < *chosen))
                    chosen = &c;
            }
            if (!chosen)
                throw ContractError(
                    "select_plan: composite rule but no covering composite registered");
            plan.target_services.push_back(composite_service_id(*chosen));
            break;
        }
        case PlanKind::Bundle:
            plan.target_services.push_back("bundle");
            break;
        case PlanKind::PerItem:
            for (ItemId i : event.requested_items.members())
                plan.target_services.push_back(per_item_service_id(i));
            break;
    }

    // Bundle quotes are assembled per item, so locality follows the
    // per-item services rather than the aggregate target.
    std::vector<std::string> locality_targets = plan.target_services;
    if (rule.plan_kind == PlanKind::Bundle) {
        locality_targets.clear();
        for (ItemId i : event.requested_items.members())
            locality_targets.push_back(per_item_service_id(i));
    }
    plan.locality = Locality::Local;
    for (const auto& svc : locality_targets) {
        if (!registry.is_local(svc)) {
            plan.locality = Locality::Remote;
            break;
        }
    }
    return plan;
}

// Rules file: one rule per line "id min max kind priority".
inline std::vector<FixedRule> load_fixed_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open rules file: " + path);
    std::vector<FixedRule> rules;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        FixedRule r;
        std::string kind;
        if (!(is >> r.rule_id >> r.min_items >> r.max_items >> kind >> r.priority))
            throw ParseError("rules: expected 'id min max kind priority'", lineno);
        if (kind == "PerItem") r.plan_kind = PlanKind::PerItem;
        else if (kind == "Bundle") r.plan_kind = PlanKind::Bundle;
        else if (kind == "Composite") r.plan_kind = PlanKind::Composite;
        else throw ParseError("rules: unknown plan kind '" + kind + "'", lineno);
        if (r.min_items > r.max_items)
            throw ParseError("rules: min > max", lineno);
        rules.push_back(std::move(r));
    }
    return rules;
}

}  // namespace autocompose
