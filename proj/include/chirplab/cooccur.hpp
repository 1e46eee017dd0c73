#ifndef CHIRPLAB_COOCCUR_HPP
#define CHIRPLAB_COOCCUR_HPP

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chirplab/dataset.hpp"
#include "chirplab/pseudolabel.hpp"

namespace chirplab::cooccur {

struct Transaction {
    std::string recording_id;
    std::set<std::string> items;
};

struct FrequentItemset {
    std::vector<std::string> items;  // sorted lexicographically
    std::size_t support_count = 0;
};

struct AssociationRule {
    std::string antecedent;                // single species by construction
    std::vector<std::string> consequent;   // sorted, non-empty, disjoint
    double confidence = 0.0;
    std::size_t support_count = 0;         // of antecedent + consequent together
};

/// One transaction per distinct recording: the union of detected species over
/// all of its intervals. Empty transactions are kept. With per_interval set,
/// each interval becomes its own transaction instead.
std::vector<Transaction> build_transactions(const pseudolabel::LabelMatrix& labels,
                                            bool per_interval = false);

/// FP-growth: FP-tree with items ordered by descending global frequency
/// (ties lexicographic), mined recursively via conditional trees. Output
/// sorted by (descending support, ascending size, lexicographic items).
std::vector<FrequentItemset> fpgrowth(const std::vector<Transaction>& transactions,
                                      std::size_t min_support);

/// Convenience conversion: a fractional support in (0,1] becomes the absolute
/// count ceil(fraction * n_transactions), floored at 1.
std::size_t min_support_from_fraction(double fraction, std::size_t n_transactions);

/// Rules with single-species antecedents from itemsets of size >= 2;
/// confidence = support(itemset) / support({antecedent}).
std::vector<AssociationRule> association_rules(const std::vector<FrequentItemset>& itemsets,
                                               double min_confidence = 0.8);

/// Histogram over transaction sizes; the normalized variant sums to 1.
std::map<std::size_t, double> itemset_size_distribution(const std::vector<Transaction>& transactions,
                                                        bool normalize);

/// Histogram over the sizes of mined frequent itemsets (the alternative
/// reading of the size distribution, exposed through the CLI).
std::map<std::size_t, double> frequent_itemset_size_distribution(
    const std::vector<FrequentItemset>& itemsets, bool normalize);

/// Per-species interval detection counts, sorted descending (ties lexicographic).
std::vector<std::pair<std::string, std::size_t>> species_frequency(
    const pseudolabel::LabelMatrix& labels);

/// CSV "source,target,confidence", one edge per (antecedent, consequent item).
void export_rule_graph(const std::vector<AssociationRule>& rules, const std::string& path);

void write_itemsets_csv(const std::vector<FrequentItemset>& itemsets, const std::string& path);
void write_rules_csv(const std::vector<AssociationRule>& rules, const std::string& path);

}  // namespace chirplab::cooccur

#endif
