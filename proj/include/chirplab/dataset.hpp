#ifndef CHIRPLAB_DATASET_HPP
#define CHIRPLAB_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chirplab::dataset {

/// Ordered list of species codes. The position of a code defines the index
/// semantics of every label and logit vector in the pipeline.
class SpeciesVocabulary {
public:
    SpeciesVocabulary() = default;
    /// Throws ValidationError on duplicate or empty codes.
    explicit SpeciesVocabulary(std::vector<std::string> codes);

    const std::vector<std::string>& codes() const { return codes_; }
    std::size_t size() const { return codes_.size(); }
    const std::string& code_at(std::size_t i) const { return codes_[i]; }

    /// Zero-based index of a code, or nullopt when unknown.
    std::optional<std::size_t> index_of(const std::string& code) const;

    bool operator==(const SpeciesVocabulary& other) const { return codes_ == other.codes_; }

private:
    std::vector<std::string> codes_;
};

/// One 5-second interval of one recording: its embedding and, when the table
/// carries them, the surrogate model's logits (finite or -inf, never NaN).
struct EmbeddingRecord {
    std::string recording_id;
    int interval_start_sec = 0;  // non-negative multiple of 5
    std::vector<double> embedding;
    std::vector<double> logits;  // empty when the table has no logits
};

struct EmbeddingTable {
    std::vector<EmbeddingRecord> records;
    std::size_t embedding_dim = 0;
    SpeciesVocabulary vocab;
    std::string source_tag;
    bool has_logits = false;

    std::size_t size() const { return records.size(); }
};

struct SplitPair {
    EmbeddingTable train;
    EmbeddingTable validation;
    std::uint64_t seed = 0;
};

struct DatasetSummary {
    std::size_t interval_count = 0;
    double total_hours = 0.0;          // intervals are 5 s each
    double call_fraction = 0.0;        // intervals with >= 1 thresholded detection
};

/// Reads one species code per non-empty line; index = line ordinal.
SpeciesVocabulary load_vocabulary(const std::string& path);

void write_vocabulary(const SpeciesVocabulary& vocab, const std::string& path);

/// Loads a CSV embedding table described by a JSON manifest
/// {"embedding_dim": D, "has_logits": bool, "vocabulary": path, "source_tag": s}.
/// A relative vocabulary path is resolved against the manifest's directory.
/// The literal token "-inf" parses to negative infinity in logit columns only.
EmbeddingTable load_embedding_table(const std::string& data_path, const std::string& manifest_path);

/// Writes the CSV side of the interchange format (17-significant-digit floats,
/// -inf spelled literally).
void write_embedding_table(const EmbeddingTable& table, const std::string& data_path);

/// Deterministic index split: Fisher-Yates over 0..n-1 with SplitMix64 seeded
/// directly by `seed`, first floor(fraction*n) indices go to train. Shared by
/// train_val_split and the trainer so their memberships always agree.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

SplitPair train_val_split(const EmbeddingTable& table, double train_fraction, std::uint64_t seed);

/// Element-wise mean of equal-length windows.
std::vector<double> aggregate_windows(const std::vector<std::vector<double>>& windows);

/// Row-major concatenation of an F x K frame matrix into one vector.
std::vector<double> flatten_frames(const std::vector<std::vector<double>>& frames);

/// Interval count, hours, and fraction of intervals whose logits clear the
/// detection threshold. Requires logits.
DatasetSummary summarize_table(const EmbeddingTable& table, double threshold);

}  // namespace chirplab::dataset

#endif
