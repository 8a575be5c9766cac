#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "autocompose/itemset.hpp"

namespace autocompose {

struct FrequentItemset {
    Itemset items;
    int support_count = 0;

    bool operator==(const FrequentItemset&) const = default;
};

// Frequent itemsets grouped by size; level k holds only size-k sets.
struct FrequentItemsetTable {
    std::map<int, std::vector<FrequentItemset>> levels;

    bool empty() const { return levels.empty(); }

    int max_level() const { return levels.empty() ? 0 : levels.rbegin()->first; }

    // Support count of a frequent itemset, or -1 if not in the table.
    int support_of(const Itemset& s) const {
        auto it = levels.find(s.size());
        if (it == levels.end()) return -1;
        for (const auto& f : it->second)
            if (f.items == s) return f.support_count;
        return -1;
    }
};

struct AssociationRule {
    Itemset antecedent;
    Itemset consequent;
    int support_count = 0;   // support of antecedent ∪ consequent
    double confidence = 0.0;

    Itemset joint() const { return antecedent.unite(consequent); }

    bool operator==(const AssociationRule&) const = default;
};

// Candidate generation: merge pairs of (k-1)-itemsets sharing their first
// k-2 members, then prune candidates with an infrequent (k-1)-subset.
inline std::vector<Itemset> apriori_gen(const std::vector<Itemset>& prior_level) {
    if (prior_level.empty()) return {};
    const int k1 = prior_level.front().size();
    for (const auto& s : prior_level)
        if (s.size() != k1)
            throw ContractError("apriori_gen: mixed itemset sizes in input");

    std::vector<Itemset> sorted = prior_level;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<Itemset> candidates;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            const Itemset& a = sorted[i];
            const Itemset& b = sorted[j];
            // Shared (k-2)-prefix means only the largest member differs.
            Itemset prefix_a = a.minus(Itemset::single(a.max_item()));
            Itemset prefix_b = b.minus(Itemset::single(b.max_item()));
            if (prefix_a != prefix_b) continue;
            Itemset merged = a.unite(b);
            bool all_subsets_frequent = true;
            for (ItemId m : merged.members()) {
                Itemset sub = merged.minus(Itemset::single(m));
                if (!std::binary_search(sorted.begin(), sorted.end(), sub)) {
                    all_subsets_frequent = false;
                    break;
                }
            }
            if (all_subsets_frequent) candidates.push_back(merged);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    return candidates;
}

// Candidates contained in transaction t, input order preserved.
inline std::vector<Itemset> candidates_in_transaction(const std::vector<Itemset>& candidates,
                                                      const Transaction& t) {
    std::vector<Itemset> out;
    for (const auto& c : candidates)
        if (c.subset_of(t.items)) out.push_back(c);
    return out;
}

inline FrequentItemsetTable frequent_itemsets(const TransactionSet& transactions,
                                              const MiningConfig& config) {
    config.validate();
    if (config.universe_size != transactions.universe_size)
        throw ConfigError("config universe size does not match transaction set");
    if (config.transaction_count != transactions.count())
        throw ConfigError("config transaction count does not match transaction set");

    FrequentItemsetTable table;
    if (transactions.transactions.empty()) return table;

    const int threshold = config.support_threshold();

    // Level 1 by direct per-item counting.
    std::vector<int> item_counts(transactions.universe_size + 1, 0);
    for (const auto& t : transactions.transactions)
        for (ItemId i : t.items.members()) ++item_counts[i];

    std::vector<FrequentItemset> level;
    for (ItemId i = 1; i <= transactions.universe_size; ++i)
        if (item_counts[i] >= threshold)
            level.push_back({Itemset::single(i), item_counts[i]});
    if (level.empty()) return table;
    table.levels[1] = level;

    for (int k = 2;; ++k) {
        std::vector<Itemset> prior;
        prior.reserve(level.size());
        for (const auto& f : level) prior.push_back(f.items);

        std::vector<Itemset> candidates = apriori_gen(prior);
        if (candidates.empty()) break;

        std::vector<int> counts(candidates.size(), 0);
        for (const auto& t : transactions.transactions)
            for (std::size_t ci = 0; ci < candidates.size(); ++ci)
                if (candidates[ci].subset_of(t.items)) ++counts[ci];

        level.clear();
        for (std::size_t ci = 0; ci < candidates.size(); ++ci)
            if (counts[ci] >= threshold) level.push_back({candidates[ci], counts[ci]});
        if (level.empty()) break;
        table.levels[k] = level;
    }
    return table;
}

// Confidence-based rule generation over every frequent itemset of size >= 2
// and every non-empty proper-subset antecedent. Output ordered by itemset,
// then antecedent.
inline std::vector<AssociationRule> generate_rules(const FrequentItemsetTable& table,
                                                   const MiningConfig& config) {
    config.validate();
    std::vector<AssociationRule> rules;
    for (const auto& [k, level] : table.levels) {
        if (k < 2) continue;
        for (const auto& f : level) {
            // Enumerate antecedents as ordered sub-bitmasks of the members.
            std::vector<ItemId> members = f.items.members();
            const int n = static_cast<int>(members.size());
            std::vector<Itemset> antecedents;
            for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
                Itemset ant;
                for (int b = 0; b < n; ++b)
                    if (mask & (1u << b)) ant.insert(members[b]);
                antecedents.push_back(ant);
            }
            std::sort(antecedents.begin(), antecedents.end());
            for (const auto& ant : antecedents) {
                int ant_support = table.support_of(ant);
                if (ant_support <= 0) continue;  // cannot happen for a valid table
                double conf = static_cast<double>(f.support_count) / ant_support;
                if (conf + 1e-12 < config.min_confidence) continue;
                rules.push_back({ant, f.items.minus(ant), f.support_count, conf});
            }
        }
    }
    return rules;
}

}  // namespace autocompose
