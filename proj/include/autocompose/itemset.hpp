#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "autocompose/errors.hpp"

namespace autocompose {

using ItemId = int;  // 1-based index into the item universe

constexpr int kMaxUniverse = 64;

// Set of items over a fixed universe, canonically ordered ascending.
// Backed by a bit mask; item i occupies bit i-1.
class Itemset {
public:
    Itemset() = default;

    explicit Itemset(std::initializer_list<ItemId> items) {
        for (ItemId i : items) insert(i);
    }

    static Itemset single(ItemId i) {
        Itemset s;
        s.insert(i);
        return s;
    }

    static Itemset from_members(const std::vector<ItemId>& items) {
        Itemset s;
        for (ItemId i : items) s.insert(i);
        return s;
    }

    void insert(ItemId i) {
        if (i < 1 || i > kMaxUniverse)
            throw ContractError("item index out of range: " + std::to_string(i));
        bits_ |= (std::uint64_t{1} << (i - 1));
    }

    bool contains(ItemId i) const {
        if (i < 1 || i > kMaxUniverse) return false;
        return (bits_ >> (i - 1)) & 1;
    }

    bool empty() const { return bits_ == 0; }
    int size() const { return __builtin_popcountll(bits_); }

    bool subset_of(const Itemset& other) const { return (bits_ & other.bits_) == bits_; }
    bool proper_subset_of(const Itemset& other) const {
        return subset_of(other) && bits_ != other.bits_;
    }
    bool intersects(const Itemset& other) const { return (bits_ & other.bits_) != 0; }

    Itemset unite(const Itemset& other) const { return Itemset(bits_ | other.bits_); }
    Itemset intersect(const Itemset& other) const { return Itemset(bits_ & other.bits_); }
    Itemset minus(const Itemset& other) const { return Itemset(bits_ & ~other.bits_); }

    ItemId max_item() const { return bits_ ? 64 - __builtin_clzll(bits_) : 0; }

    std::vector<ItemId> members() const {
        std::vector<ItemId> out;
        out.reserve(size());
        for (std::uint64_t b = bits_; b;) {
            int i = __builtin_ctzll(b);
            out.push_back(i + 1);
            b &= b - 1;
        }
        return out;
    }

    std::string to_string(char sep = ',') const {
        std::ostringstream os;
        bool first = true;
        for (ItemId i : members()) {
            if (!first) os << sep;
            os << i;
            first = false;
        }
        return os.str();
    }

    std::uint64_t raw_bits() const { return bits_; }

    bool operator==(const Itemset& other) const = default;

    // Lexicographic order on the ascending member sequence; shorter prefixes first.
    bool operator<(const Itemset& other) const {
        std::uint64_t a = bits_, b = other.bits_;
        while (a && b) {
            int ia = __builtin_ctzll(a), ib = __builtin_ctzll(b);
            if (ia != ib) return ia < ib;
            a &= a - 1;
            b &= b - 1;
        }
        return !a && b;
    }

private:
    explicit Itemset(std::uint64_t bits) : bits_(bits) {}
    std::uint64_t bits_ = 0;
};

struct Transaction {
    Itemset items;
    int ordinal = 0;  // row number, unique within a set
};

struct TransactionSet {
    std::vector<Transaction> transactions;
    int universe_size = 0;

    int count() const { return static_cast<int>(transactions.size()); }
};

struct MiningConfig {
    int universe_size = 0;
    int transaction_count = 0;
    double min_support_percent = 0.0;  // in (0, 100]
    double min_confidence = 0.6;       // in (0, 1]

    void validate() const {
        if (universe_size < 1 || universe_size > kMaxUniverse)
            throw ConfigError("universe size must be in [1, " +
                              std::to_string(kMaxUniverse) + "]");
        if (transaction_count < 0) throw ConfigError("negative transaction count");
        if (min_support_percent <= 0.0 || min_support_percent > 100.0)
            throw ConfigError("support percent must be in (0, 100]");
        if (min_confidence <= 0.0 || min_confidence > 1.0)
            throw ConfigError("min confidence must be in (0, 1]");
    }

    // Smallest integer count satisfying count >= N * minsup.
    int support_threshold() const {
        double raw = transaction_count * min_support_percent / 100.0;
        int thr = static_cast<int>(raw);
        if (static_cast<double>(thr) < raw) ++thr;
        if (thr < 1) thr = 1;
        return thr;
    }
};

inline Itemset parse_itemset_csv(const std::string& text) {
    Itemset s;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) throw ParseError("empty item token in '" + text + "'");
        int v = 0;
        std::size_t pos = 0;
        try {
            v = std::stoi(tok, &pos);
        } catch (const std::exception&) {
            throw ParseError("bad item token '" + tok + "'");
        }
        if (pos != tok.size() || v < 1 || v > kMaxUniverse)
            throw ParseError("bad item token '" + tok + "'");
        s.insert(v);
    }
    return s;
}

}  // namespace autocompose
