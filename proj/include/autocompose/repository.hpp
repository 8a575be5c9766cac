#pragma once

#include <cstdint>
#include <iomanip>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "autocompose/mining.hpp"

namespace autocompose {

struct TriggerRecord {
    std::string event_id;
    Itemset requested_items;
    std::int64_t timestamp = 0;  // UTC seconds
    std::string cause;

    bool operator==(const TriggerRecord&) const = default;
};

struct RuleStoreEntry {
    AssociationRule rule;
    std::int64_t discovered_at = 0;
    std::optional<std::string> composite_service;

    bool operator==(const RuleStoreEntry&) const = default;
};

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream is(line);
    while (std::getline(is, tok, sep)) out.push_back(tok);
    return out;
}

inline std::string rstrip(const std::string& s) {
    std::size_t end = s.size();
    while (end > 0 && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
    return s.substr(0, end);
}

}  // namespace detail

// Parses the 3-4 line config file: items, transactions, support percent,
// optional min confidence.
inline MiningConfig load_config(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw StorageError("cannot open config file: " + config_path);
    MiningConfig cfg;
    std::string line;
    std::vector<double> values;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::rstrip(line);
        if (line.empty()) continue;
        try {
            std::size_t pos = 0;
            values.push_back(std::stod(line, &pos));
            if (pos != line.size()) throw std::invalid_argument(line);
        } catch (const std::exception&) {
            throw ParseError("config: bad numeric value '" + line + "'", lineno);
        }
    }
    if (values.size() < 3 || values.size() > 4)
        throw ParseError("config: expected 3 or 4 lines, got " + std::to_string(values.size()));
    cfg.universe_size = static_cast<int>(values[0]);
    cfg.transaction_count = static_cast<int>(values[1]);
    cfg.min_support_percent = values[2];
    if (values.size() == 4) cfg.min_confidence = values[3];
    cfg.validate();
    return cfg;
}

// Parses the 0/1 matrix transaction file against a loaded config.
inline TransactionSet load_transactions(const std::string& transactions_path,
                                        const MiningConfig& cfg) {
    std::ifstream in(transactions_path);
    if (!in) throw StorageError("cannot open transactions file: " + transactions_path);
    TransactionSet set;
    set.universe_size = cfg.universe_size;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::rstrip(line);
        if (line.empty()) continue;
        std::istringstream is(line);
        Itemset items;
        std::string cell;
        int col = 0;
        while (is >> cell) {
            ++col;
            if (cell == "1") {
                if (col > cfg.universe_size)
                    throw ParseError("transactions: row wider than universe", lineno);
                items.insert(col);
            } else if (cell != "0") {
                throw ParseError("transactions: non-binary cell '" + cell + "'", lineno);
            }
        }
        if (col != cfg.universe_size)
            throw ParseError("transactions: row width " + std::to_string(col) +
                                 " != universe size " + std::to_string(cfg.universe_size),
                             lineno);
        set.transactions.push_back({items, static_cast<int>(set.transactions.size()) + 1});
    }
    if (set.count() != cfg.transaction_count)
        throw ParseError("transactions: file holds " + std::to_string(set.count()) +
                         " rows but config declares " + std::to_string(cfg.transaction_count));
    return set;
}

inline std::pair<TransactionSet, MiningConfig> load_dataset(const std::string& transactions_path,
                                                            const std::string& config_path) {
    MiningConfig cfg = load_config(config_path);
    return {load_transactions(transactions_path, cfg), cfg};
}

inline std::string encode_transaction_row(const Itemset& items, int universe_size) {
    std::ostringstream os;
    for (int i = 1; i <= universe_size; ++i) {
        if (i > 1) os << ' ';
        os << (items.contains(i) ? '1' : '0');
    }
    return os.str();
}

inline void save_config(const std::string& config_path, const MiningConfig& cfg) {
    std::ofstream out(config_path, std::ios::trunc);
    if (!out) throw StorageError("cannot write config file: " + config_path);
    out << cfg.universe_size << '\n'
        << cfg.transaction_count << '\n'
        << cfg.min_support_percent << '\n'
        << cfg.min_confidence << '\n';
    out.flush();
    if (!out) throw StorageError("write failed: " + config_path);
}

// Owns the transaction log + config pair; single writer.
class DatasetStore {
public:
    DatasetStore(std::string transactions_path, std::string config_path)
        : transactions_path_(std::move(transactions_path)),
          config_path_(std::move(config_path)) {}

    std::pair<TransactionSet, MiningConfig> load() const {
        return load_dataset(transactions_path_, config_path_);
    }

    // Appends one row and bumps the declared count. Returns the new count.
    int append_transaction(const Transaction& tx) {
        MiningConfig cfg = load_config(config_path_);
        if (tx.items.empty())
            throw ContractError("empty transactions are not recorded");
        if (tx.items.max_item() > cfg.universe_size)
            throw ContractError("transaction items exceed the universe");
        {
            std::ofstream out(transactions_path_, std::ios::app);
            if (!out) throw StorageError("cannot append to " + transactions_path_);
            out << encode_transaction_row(tx.items, cfg.universe_size) << '\n';
            out.flush();
            if (!out) throw StorageError("append failed: " + transactions_path_);
        }
        cfg.transaction_count += 1;
        save_config(config_path_, cfg);
        return cfg.transaction_count;
    }

    const std::string& transactions_path() const { return transactions_path_; }
    const std::string& config_path() const { return config_path_; }

private:
    std::string transactions_path_;
    std::string config_path_;
};

// Append-only per-event audit log; tab-separated, one record per line.
class TriggerLog {
public:
    explicit TriggerLog(std::string path) : path_(std::move(path)) {
        for (const auto& r : load()) seen_ids_.insert(r.event_id);
    }

    void record(const TriggerRecord& r) {
        if (seen_ids_.contains(r.event_id))
            throw StorageError("duplicate event id: " + r.event_id);
        std::ofstream out(path_, std::ios::app);
        if (!out) throw StorageError("cannot append to trigger log: " + path_);
        out << r.event_id << '\t' << r.requested_items.to_string() << '\t' << r.timestamp
            << '\t' << r.cause << '\n';
        out.flush();
        if (!out) throw StorageError("trigger log write failed: " + path_);
        seen_ids_.insert(r.event_id);
    }

    std::vector<TriggerRecord> load() const {
        std::vector<TriggerRecord> out;
        std::ifstream in(path_);
        if (!in) return out;  // absent file = empty log
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto fields = detail::split(line, '\t');
            if (fields.size() != 4)
                throw ParseError("trigger log: expected 4 fields", lineno);
            TriggerRecord r;
            r.event_id = fields[0];
            r.requested_items = parse_itemset_csv(fields[1]);
            r.timestamp = std::stoll(fields[2]);
            r.cause = fields[3];
            out.push_back(std::move(r));
        }
        return out;
    }

    std::optional<TriggerRecord> find(const std::string& event_id) const {
        for (const auto& r : load())
            if (r.event_id == event_id) return r;
        return std::nullopt;
    }

private:
    std::string path_;
    std::set<std::string> seen_ids_;
};

// Line-delimited persistence for discovered rules.
class RuleStore {
public:
    explicit RuleStore(std::string path) : path_(std::move(path)) {}

    void store(const std::vector<RuleStoreEntry>& entries) const {
        std::ofstream out(path_, std::ios::trunc);
        if (!out) throw StorageError("cannot write rule store: " + path_);
        for (const auto& e : entries) {
            out << e.rule.antecedent.to_string() << '\t' << e.rule.consequent.to_string()
                << '\t' << e.rule.support_count << '\t' << std::setprecision(17)
                << e.rule.confidence << '\t'
                << e.discovered_at << '\t'
                << (e.composite_service ? *e.composite_service : std::string("-")) << '\n';
        }
        out.flush();
        if (!out) throw StorageError("rule store write failed: " + path_);
    }

    std::vector<RuleStoreEntry> load() const {
        std::vector<RuleStoreEntry> out;
        std::ifstream in(path_);
        if (!in) return out;  // cold start
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto fields = detail::split(line, '\t');
            if (fields.size() != 6)
                throw ParseError("rule store: expected 6 fields", lineno);
            RuleStoreEntry e;
            e.rule.antecedent = parse_itemset_csv(fields[0]);
            e.rule.consequent = parse_itemset_csv(fields[1]);
            e.rule.support_count = std::stoi(fields[2]);
            e.rule.confidence = std::stod(fields[3]);
            e.discovered_at = std::stoll(fields[4]);
            if (fields[5] != "-") e.composite_service = fields[5];
            out.push_back(std::move(e));
        }
        return out;
    }

private:
    std::string path_;
};

}  // namespace autocompose
