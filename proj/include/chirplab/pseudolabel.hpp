#ifndef CHIRPLAB_PSEUDOLABEL_HPP
#define CHIRPLAB_PSEUDOLABEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chirplab/dataset.hpp"

namespace chirplab::pseudolabel {

struct PseudoLabelConfig {
    double p_threshold = 0.5;  // in (0,1)
    bool use_species_augmentation = false;
};

/// Binary multi-label vector aligned to a SpeciesVocabulary.
using LabelVector = std::vector<std::uint8_t>;

/// Per-interval binary targets plus the row keys they belong to.
struct LabelMatrix {
    std::vector<std::string> recording_ids;   // row-aligned
    std::vector<int> interval_starts;         // row-aligned
    std::vector<LabelVector> rows;
    std::vector<std::string> codes;           // column semantics

    std::size_t size() const { return rows.size(); }
    std::size_t num_classes() const { return codes.size(); }
};

/// Numerically stable logistic function; sigmoid(-inf) == 0 exactly.
/// Throws ValidationError on NaN.
double sigmoid(double x);
std::vector<double> sigmoid(const std::vector<double>& logits);

/// Bit i = 1 iff sigmoid(logit_i) > p_threshold (strictly).
LabelVector threshold_predictions(const std::vector<double>& logits, double p_threshold);

/// 1 iff any bit is set.
std::uint8_t call_indicator(const LabelVector& label);

/// One-hot vector for a known species code.
LabelVector species_onehot(const std::string& code, const dataset::SpeciesVocabulary& vocab);

/// y_hat OR (call_indicator(y_hat) AND onehot), element-wise.
LabelVector augment_with_species(const LabelVector& y_hat, const LabelVector& onehot);

/// Thresholds every row of the table; with augmentation on, ORs in the
/// recording's folder species whenever the row detects any call.
LabelMatrix build_label_matrix(const dataset::EmbeddingTable& table,
                               const std::map<std::string, std::string>& folder_species,
                               const PseudoLabelConfig& config);

/// Folder-species map file: CSV "recording_id,species_code".
std::map<std::string, std::string> load_folder_species(const std::string& path);

/// Label matrix CSV: recording_id,interval_start_sec,<code_0>,...
void write_label_matrix(const LabelMatrix& labels, const std::string& path);
LabelMatrix load_label_matrix(const std::string& path);

}  // namespace chirplab::pseudolabel

#endif
