#include "chirplab/cooccur.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <unordered_map>

#include "chirplab/common.hpp"

namespace chirplab::cooccur {

namespace {

// FP-tree node. Items are dense ranks: 0 = most frequent. Paths from the
// root are always in ascending rank order, so children are keyed by rank.
struct FpNode {
    std::size_t item = 0;
    std::size_t count = 0;
    FpNode* parent = nullptr;
    std::map<std::size_t, std::unique_ptr<FpNode>> children;
};

struct FpTree {
    FpNode root;
    // header[rank] = every node carrying that rank, insertion order
    std::map<std::size_t, std::vector<FpNode*>> header;

    void insert(const std::vector<std::size_t>& ranked_items, std::size_t weight) {
        FpNode* node = &root;
        for (std::size_t item : ranked_items) {
            auto it = node->children.find(item);
            if (it == node->children.end()) {
                auto child = std::make_unique<FpNode>();
                child->item = item;
                child->parent = node;
                FpNode* raw = child.get();
                node->children.emplace(item, std::move(child));
                header[item].push_back(raw);
                node = raw;
            } else {
                node = it->second.get();
            }
            node->count += weight;
        }
    }
};

// A conditional pattern base entry: a root-to-node prefix path with the
// count of the node it was projected from.
struct WeightedPath {
    std::vector<std::size_t> items;  // ascending rank order
    std::size_t weight = 0;
};

void mine(const FpTree& tree, std::size_t min_support,
          const std::vector<std::string>& rank_to_name,
          std::vector<std::string>& suffix, std::vector<FrequentItemset>& out) {
    // Least frequent item first, the classic bottom-up order.
    for (auto it = tree.header.rbegin(); it != tree.header.rend(); ++it) {
        const std::size_t item = it->first;
        std::size_t support = 0;
        for (const FpNode* node : it->second) support += node->count;
        if (support < min_support) continue;

        FrequentItemset found;
        found.items.push_back(rank_to_name[item]);
        found.items.insert(found.items.end(), suffix.begin(), suffix.end());
        std::sort(found.items.begin(), found.items.end());
        found.support_count = support;
        out.push_back(std::move(found));

        // Conditional pattern base: prefix paths above each node of `item`.
        std::vector<WeightedPath> base;
        for (const FpNode* node : it->second) {
            WeightedPath path;
            path.weight = node->count;
            for (const FpNode* up = node->parent; up != nullptr && up->parent != nullptr;
                 up = up->parent) {
                path.items.push_back(up->item);
            }
            if (path.items.empty()) continue;
            std::reverse(path.items.begin(), path.items.end());
            base.push_back(std::move(path));
        }
        if (base.empty()) continue;

        // Items below min_support within the base cannot extend this suffix.
        std::map<std::size_t, std::size_t> base_counts;
        for (const auto& path : base) {
            for (std::size_t i : path.items) base_counts[i] += path.weight;
        }
        FpTree conditional;
        for (const auto& path : base) {
            std::vector<std::size_t> kept;
            for (std::size_t i : path.items) {
                if (base_counts[i] >= min_support) kept.push_back(i);
            }
            if (!kept.empty()) conditional.insert(kept, path.weight);
        }
        if (conditional.header.empty()) continue;

        suffix.insert(suffix.begin(), rank_to_name[item]);
        mine(conditional, min_support, rank_to_name, suffix, out);
        suffix.erase(suffix.begin());
    }
}

}  // namespace

std::vector<Transaction> build_transactions(const pseudolabel::LabelMatrix& labels,
                                            bool per_interval) {
    std::vector<Transaction> transactions;
    if (per_interval) {
        transactions.reserve(labels.size());
        for (std::size_t r = 0; r < labels.size(); ++r) {
            Transaction txn;
            txn.recording_id = labels.recording_ids[r] + "_" +
                               std::to_string(labels.interval_starts[r]);
            for (std::size_t c = 0; c < labels.num_classes(); ++c) {
                if (labels.rows[r][c]) txn.items.insert(labels.codes[c]);
            }
            transactions.push_back(std::move(txn));
        }
        return transactions;
    }
    // One basket per recording, first-appearance order preserved.
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const std::string& id = labels.recording_ids[r];
        auto it = index.find(id);
        if (it == index.end()) {
            it = index.emplace(id, transactions.size()).first;
            transactions.push_back(Transaction{id, {}});
        }
        Transaction& txn = transactions[it->second];
        for (std::size_t c = 0; c < labels.num_classes(); ++c) {
            if (labels.rows[r][c]) txn.items.insert(labels.codes[c]);
        }
    }
    return transactions;
}

std::vector<FrequentItemset> fpgrowth(const std::vector<Transaction>& transactions,
                                      std::size_t min_support) {
    if (min_support < 1) {
        throw ValidationError("fpgrowth: min_support must be at least 1");
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& txn : transactions) {
        for (const auto& item : txn.items) ++counts[item];
    }

    // Global ordering: descending frequency, ties lexicographic.
    std::vector<std::pair<std::string, std::size_t>> frequent;
    for (const auto& [item, count] : counts) {
        if (count >= min_support) frequent.emplace_back(item, count);
    }
    std::sort(frequent.begin(), frequent.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> rank_to_name;
    std::unordered_map<std::string, std::size_t> name_to_rank;
    for (const auto& [item, count] : frequent) {
        name_to_rank.emplace(item, rank_to_name.size());
        rank_to_name.push_back(item);
    }

    FpTree tree;
    for (const auto& txn : transactions) {
        std::vector<std::size_t> ranked;
        for (const auto& item : txn.items) {
            auto it = name_to_rank.find(item);
            if (it != name_to_rank.end()) ranked.push_back(it->second);
        }
        if (ranked.empty()) continue;
        std::sort(ranked.begin(), ranked.end());
        tree.insert(ranked, 1);
    }

    std::vector<FrequentItemset> out;
    std::vector<std::string> suffix;
    mine(tree, min_support, rank_to_name, suffix, out);

    std::sort(out.begin(), out.end(), [](const FrequentItemset& a, const FrequentItemset& b) {
        if (a.support_count != b.support_count) return a.support_count > b.support_count;
        if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
        return a.items < b.items;
    });
    return out;
}

std::size_t min_support_from_fraction(double fraction, std::size_t n_transactions) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ValidationError("min_support fraction must lie in (0,1], got " +
                              format_double(fraction));
    }
    const auto count = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(n_transactions)));
    return std::max<std::size_t>(count, 1);
}

std::vector<AssociationRule> association_rules(const std::vector<FrequentItemset>& itemsets,
                                               double min_confidence) {
    std::map<std::vector<std::string>, std::size_t> support;
    for (const auto& itemset : itemsets) {
        support[itemset.items] = itemset.support_count;
    }
    std::vector<AssociationRule> rules;
    for (const auto& itemset : itemsets) {
        if (itemset.items.size() < 2) continue;
        for (const auto& antecedent : itemset.items) {
            auto it = support.find({antecedent});
            if (it == support.end()) {
                throw ValidationError("association_rules: itemsets are not downward closed: "
                                      "missing singleton support for '" + antecedent + "'");
            }
            const double confidence = static_cast<double>(itemset.support_count) /
                                      static_cast<double>(it->second);
            if (confidence < min_confidence) continue;
            AssociationRule rule;
            rule.antecedent = antecedent;
            for (const auto& item : itemset.items) {
                if (item != antecedent) rule.consequent.push_back(item);
            }
            rule.confidence = confidence;
            rule.support_count = itemset.support_count;
            rules.push_back(std::move(rule));
        }
    }
    std::sort(rules.begin(), rules.end(), [](const AssociationRule& a, const AssociationRule& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
        return a.consequent < b.consequent;
    });
    return rules;
}

std::map<std::size_t, double> itemset_size_distribution(const std::vector<Transaction>& transactions,
                                                        bool normalize) {
    std::map<std::size_t, double> histogram;
    for (const auto& txn : transactions) {
        histogram[txn.items.size()] += 1.0;
    }
    if (normalize && !transactions.empty()) {
        const double inv = 1.0 / static_cast<double>(transactions.size());
        for (auto& [size, value] : histogram) value *= inv;
    }
    return histogram;
}

std::map<std::size_t, double> frequent_itemset_size_distribution(
    const std::vector<FrequentItemset>& itemsets, bool normalize) {
    std::map<std::size_t, double> histogram;
    for (const auto& itemset : itemsets) {
        histogram[itemset.items.size()] += 1.0;
    }
    if (normalize && !itemsets.empty()) {
        const double inv = 1.0 / static_cast<double>(itemsets.size());
        for (auto& [size, value] : histogram) value *= inv;
    }
    return histogram;
}

std::vector<std::pair<std::string, std::size_t>> species_frequency(
    const pseudolabel::LabelMatrix& labels) {
    std::vector<std::pair<std::string, std::size_t>> counts;
    counts.reserve(labels.num_classes());
    for (std::size_t c = 0; c < labels.num_classes(); ++c) {
        std::size_t count = 0;
        for (std::size_t r = 0; r < labels.size(); ++r) {
            if (labels.rows[r][c]) ++count;
        }
        counts.emplace_back(labels.codes[c], count);
    }
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return counts;
}

namespace {

std::string join_pipe(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.push_back('|');
        out += items[i];
    }
    return out;
}

}  // namespace

void export_rule_graph(const std::vector<AssociationRule>& rules, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open rule graph '" + path + "' for writing");
    }
    out << "source,target,confidence\n";
    for (const auto& rule : rules) {
        for (const auto& target : rule.consequent) {
            out << rule.antecedent << ',' << target << ',' << format_double(rule.confidence)
                << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing rule graph '" + path + "'");
    }
}

void write_itemsets_csv(const std::vector<FrequentItemset>& itemsets, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open itemsets CSV '" + path + "' for writing");
    }
    out << "items,support_count\n";
    for (const auto& itemset : itemsets) {
        out << join_pipe(itemset.items) << ',' << itemset.support_count << '\n';
    }
}

void write_rules_csv(const std::vector<AssociationRule>& rules, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open rules CSV '" + path + "' for writing");
    }
    out << "antecedent,consequent,confidence,support_count\n";
    for (const auto& rule : rules) {
        out << rule.antecedent << ',' << join_pipe(rule.consequent) << ','
            << format_double(rule.confidence) << ',' << rule.support_count << '\n';
    }
}

}  // namespace chirplab::cooccur
