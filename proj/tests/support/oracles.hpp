// Test-only oracles, deliberately independent of the library code paths they
// check: plain loops, pairwise counting, and subset enumeration.
#ifndef CHIRPLAB_TESTS_ORACLES_HPP
#define CHIRPLAB_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chirplab/cooccur.hpp"
#include "chirplab/matrix.hpp"
#include "chirplab/rng.hpp"

namespace oracles {

/// Central finite differences of a scalar loss with respect to every logit.
inline chirplab::Matrix finite_difference_grad(
    const std::function<double(const chirplab::Matrix&)>& loss_value,
    const chirplab::Matrix& logits, double step = 1e-5) {
    chirplab::Matrix grad(logits.rows, logits.cols);
    chirplab::Matrix probe = logits;
    for (std::size_t i = 0; i < logits.data.size(); ++i) {
        const double saved = probe.data[i];
        probe.data[i] = saved + step;
        const double up = loss_value(probe);
        probe.data[i] = saved - step;
        const double down = loss_value(probe);
        probe.data[i] = saved;
        grad.data[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

/// max |a-b| / (1 + max|a|): the relative error measure used by the
/// gradient-check criteria.
inline double grad_relative_error(const chirplab::Matrix& analytic, const chirplab::Matrix& fd) {
    double max_diff = 0.0;
    double max_analytic = 0.0;
    for (std::size_t i = 0; i < analytic.data.size(); ++i) {
        max_diff = std::max(max_diff, std::fabs(analytic.data[i] - fd.data[i]));
        max_analytic = std::max(max_analytic, std::fabs(analytic.data[i]));
    }
    return max_diff / (1.0 + max_analytic);
}

/// AUROC by direct pairwise counting: each positive-negative pair scores
/// 1 for a win, 0.5 for a tie.
inline std::optional<double> pairwise_auroc(const std::vector<double>& scores,
                                            const std::vector<std::uint8_t>& labels) {
    double wins = 0.0;
    std::size_t positives = 0, negatives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i]) ++positives;
        else ++negatives;
    }
    if (positives == 0 || negatives == 0) return std::nullopt;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / (static_cast<double>(positives) * static_cast<double>(negatives));
}

/// Frequent itemsets by enumerating every non-empty subset of the item
/// universe and counting containment. Output uses fpgrowth's canonical sort
/// so results compare with ==.
inline std::vector<chirplab::cooccur::FrequentItemset> brute_force_itemsets(
    const std::vector<chirplab::cooccur::Transaction>& transactions, std::size_t min_support) {
    std::set<std::string> universe_set;
    for (const auto& txn : transactions) {
        universe_set.insert(txn.items.begin(), txn.items.end());
    }
    std::vector<std::string> universe(universe_set.begin(), universe_set.end());

    std::vector<chirplab::cooccur::FrequentItemset> out;
    const std::size_t n = universe.size();
    for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask) {
        std::vector<std::string> subset;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1ULL << i)) subset.push_back(universe[i]);
        }
        std::size_t support = 0;
        for (const auto& txn : transactions) {
            bool contained = true;
            for (const auto& item : subset) {
                if (!txn.items.count(item)) {
                    contained = false;
                    break;
                }
            }
            if (contained) ++support;
        }
        if (support >= min_support) {
            out.push_back({subset, support});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.support_count != b.support_count) return a.support_count > b.support_count;
        if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
        return a.items < b.items;
    });
    return out;
}

inline bool itemsets_equal(const std::vector<chirplab::cooccur::FrequentItemset>& a,
                           const std::vector<chirplab::cooccur::FrequentItemset>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].items != b[i].items || a[i].support_count != b[i].support_count) return false;
    }
    return true;
}

/// Direct evaluation of the label-combination formula:
/// out = y OR (call(y) AND s), where call(y) = (sum of bits > 0).
inline std::vector<std::uint8_t> label_or_gated_species(const std::vector<std::uint8_t>& y,
                                                        const std::vector<std::uint8_t>& s) {
    int sum = 0;
    for (std::uint8_t b : y) sum += b;
    const std::uint8_t call = sum > 0 ? 1 : 0;
    std::vector<std::uint8_t> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(y[i] | (call & s[i]));
    }
    return out;
}

/// Standard-normal draw via Box-Muller on SplitMix64 uniforms; deterministic
/// and platform-stable, used by the synthetic fixtures.
inline double gaussian(chirplab::SplitMix64& rng) {
    double u1 = rng.next_double();
    while (u1 <= 0.0) u1 = rng.next_double();
    const double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace oracles

#endif
