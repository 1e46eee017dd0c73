#ifndef CHIRPLAB_METRICS_HPP
#define CHIRPLAB_METRICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chirplab/matrix.hpp"

namespace chirplab::metrics {

struct PerClassEntry {
    std::string code;
    double f1 = 0.0;
    std::optional<double> auroc;  // nullopt = skipped
    std::size_t positive_count = 0;
};

struct EvalReport {
    double macro_f1 = 0.0;
    double macro_auroc = 0.0;  // averaged over non-skipped classes only
    std::vector<PerClassEntry> per_class;
    std::vector<std::string> skipped_classes;
};

/// Mann-Whitney rank AUROC with mid-rank tie handling. Returns nullopt
/// (skipped) when the class has no positives or no negatives.
std::optional<double> binary_auroc(const std::vector<double>& scores,
                                   const std::vector<std::uint8_t>& labels);

/// Mean of binary_auroc over non-skipped classes; second member lists the
/// skipped column indices. Throws when every class is skipped.
std::pair<double, std::vector<std::size_t>> macro_auroc(const Matrix& scores,
                                                        const Matrix& labels);

/// Unweighted mean over all classes of F1 = 2tp/(2tp+fp+fn), with 0 for
/// classes whose denominator is 0.
double macro_f1(const Matrix& pred_bits, const Matrix& labels);

/// Thresholds scores (strictly >) and assembles the full per-class report.
EvalReport evaluate(const Matrix& scores, const Matrix& labels,
                    const std::vector<std::string>& codes,
                    double decision_threshold = 0.5);

/// JSON form of the report.
std::string report_to_json(const EvalReport& report);

/// Aligned human-readable table.
std::string report_to_text(const EvalReport& report);

}  // namespace chirplab::metrics

#endif
