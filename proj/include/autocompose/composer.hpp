#pragma once

#include <chrono>
#include <map>

#include "autocompose/dispatcher.hpp"
#include "autocompose/repository.hpp"

namespace autocompose {

struct PriceCatalog {
    std::map<ItemId, long long> prices;  // minor currency units, >= 0
    std::map<ItemId, std::string> item_names;

    long long price_of(ItemId i) const {
        auto it = prices.find(i);
        if (it == prices.end())
            throw CatalogError("no price for item " + std::to_string(i));
        return it->second;
    }
};

// Catalog file: one "index name price" line per item.
inline PriceCatalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open catalog file: " + path);
    PriceCatalog catalog;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        int index;
        std::string name;
        long long price;
        if (!(is >> index >> name >> price))
            throw ParseError("catalog: expected 'index name price'", lineno);
        if (price < 0) throw ParseError("catalog: negative price", lineno);
        catalog.prices[index] = price;
        catalog.item_names[index] = name;
    }
    return catalog;
}

inline long long quote_cost(const Itemset& items, const PriceCatalog& catalog) {
    long long total = 0;
    for (ItemId i : items.members()) total += catalog.price_of(i);
    return total;
}

struct CompositeService {
    std::string service_id;  // stable function of the canonical itemset
    Itemset itemset;         // size >= 2, frequent at discovery time
    std::vector<AssociationRule> source_rules;
};

// One composite per maximal frequent itemset of size >= 2 that is the joint
// itemset of at least one qualifying rule and is not already registered.
inline std::vector<CompositeService> synthesize_composites(
    const std::vector<AssociationRule>& rules, const FrequentItemsetTable& table,
    const std::set<Itemset>& registered) {
    // Collect all frequent itemsets for the maximality check.
    std::vector<Itemset> frequent;
    for (const auto& [k, level] : table.levels)
        for (const auto& f : level) frequent.push_back(f.items);

    std::vector<CompositeService> out;
    for (const auto& [k, level] : table.levels) {
        if (k < 2) continue;
        for (const auto& f : level) {
            bool maximal = std::none_of(frequent.begin(), frequent.end(), [&](const Itemset& g) {
                return f.items.proper_subset_of(g);
            });
            if (!maximal) continue;
            // Skip itemsets subsumed by (or equal to) a live composite.
            bool subsumed = std::any_of(registered.begin(), registered.end(),
                                        [&](const Itemset& r) { return f.items.subset_of(r); });
            if (subsumed) continue;

            CompositeService svc;
            svc.itemset = f.items;
            svc.service_id = composite_service_id(f.items);
            for (const auto& r : rules)
                if (r.joint() == f.items) svc.source_rules.push_back(r);
            if (svc.source_rules.empty()) continue;  // frequency alone does not qualify
            out.push_back(std::move(svc));
        }
    }
    return out;
}

// Builds cost-quoting handlers for composites and registers them live.
// Returns the number actually installed; duplicates are skipped.
class Composer {
public:
    Composer(Dispatcher& dispatcher, PriceCatalog catalog, RuleStore rule_store)
        : dispatcher_(dispatcher), catalog_(std::move(catalog)),
          rule_store_(std::move(rule_store)) {}

    int install(const std::vector<CompositeService>& composites) {
        int installed = 0;
        std::vector<RuleStoreEntry> entries = rule_store_.load();
        for (const auto& svc : composites) {
            if (dispatcher_.has_handler(svc.service_id)) continue;
            HandlerRegistration reg;
            reg.service_id = svc.service_id;
            reg.handled_itemset = svc.itemset;
            PriceCatalog catalog = catalog_;
            reg.handler = [catalog](const ServiceEvent& event, const Plan&) {
                ServiceOutcome r;
                r.event_id = event.event_id;
                // Charge only what was requested, even when the composite
                // covers a superset.
                r.total_cost = quote_cost(event.requested_items, catalog);
                r.sub_dispatch_count = 1;
                return r;
            };
            try {
                dispatcher_.register_handler(std::move(reg));
            } catch (const RegistrationError&) {
                continue;  // lost a race with another installer; not fatal
            }
            ++installed;
            std::int64_t now = std::chrono::duration_cast<std::chrono::seconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count();
            for (const auto& rule : svc.source_rules)
                entries.push_back({rule, now, svc.service_id});
        }
        if (installed > 0) rule_store_.store(entries);
        return installed;
    }

    const PriceCatalog& catalog() const { return catalog_; }

private:
    Dispatcher& dispatcher_;
    PriceCatalog catalog_;
    RuleStore rule_store_;
};

}  // namespace autocompose
