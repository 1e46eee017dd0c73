// Synthetic-task builders shared by the trainer, CLI, and acceptance suites.
#ifndef CHIRPLAB_TESTS_FIXTURES_HPP
#define CHIRPLAB_TESTS_FIXTURES_HPP

#include <map>
#include <string>
#include <vector>

#include "chirplab/dataset.hpp"
#include "chirplab/pseudolabel.hpp"
#include "chirplab/rng.hpp"
#include "support/oracles.hpp"

namespace testsupport {

inline chirplab::dataset::SpeciesVocabulary make_vocab(std::size_t num_classes) {
    std::vector<std::string> codes;
    for (std::size_t i = 0; i < num_classes; ++i) {
        codes.push_back("sp" + std::to_string(i));
    }
    return chirplab::dataset::SpeciesVocabulary(std::move(codes));
}

/// Linearly separable multi-label task: embeddings ~ N(0,1), labels are the
/// sign pattern of a fixed random linear map. A linear head can fit it
/// exactly, so convergence thresholds are meaningful.
struct SeparableTask {
    chirplab::dataset::EmbeddingTable table;
    chirplab::pseudolabel::LabelMatrix labels;
};

inline SeparableTask separable_task(std::size_t n, std::size_t d, std::size_t c,
                                    std::uint64_t seed) {
    chirplab::SplitMix64 rng(seed);
    SeparableTask task;
    task.table.embedding_dim = d;
    task.table.vocab = make_vocab(c);
    task.table.source_tag = "synthetic-separable";
    task.table.has_logits = false;

    std::vector<std::vector<double>> map(d, std::vector<double>(c));
    for (auto& row : map) {
        for (double& v : row) v = oracles::gaussian(rng);
    }

    task.labels.codes = task.table.vocab.codes();
    for (std::size_t i = 0; i < n; ++i) {
        chirplab::dataset::EmbeddingRecord rec;
        rec.recording_id = "rec" + std::to_string(i);
        rec.interval_start_sec = 0;
        rec.embedding.resize(d);
        for (double& v : rec.embedding) v = oracles::gaussian(rng);

        chirplab::pseudolabel::LabelVector bits(c, 0);
        for (std::size_t j = 0; j < c; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += rec.embedding[k] * map[k][j];
            bits[j] = dot > 0.0 ? 1 : 0;
        }
        task.labels.recording_ids.push_back(rec.recording_id);
        task.labels.interval_starts.push_back(rec.interval_start_sec);
        task.labels.rows.push_back(std::move(bits));
        task.table.records.push_back(std::move(rec));
    }
    return task;
}

/// Fixture where the folder species is informative and the surrogate logits
/// are not: every row fires one uniformly random class (so plain thresholded
/// labels are unlearnable noise), while the folder species is a deterministic
/// function of the embedding.
struct AugmentationTask {
    chirplab::dataset::EmbeddingTable table;
    std::map<std::string, std::string> folder_species;
};

inline AugmentationTask augmentation_task(std::size_t n, std::size_t d, std::size_t c,
                                          std::uint64_t seed) {
    chirplab::SplitMix64 rng(seed);
    AugmentationTask task;
    task.table.embedding_dim = d;
    task.table.vocab = make_vocab(c);
    task.table.source_tag = "synthetic-augmentation";
    task.table.has_logits = true;

    std::vector<std::vector<double>> map(d, std::vector<double>(c));
    for (auto& row : map) {
        for (double& v : row) v = oracles::gaussian(rng);
    }

    for (std::size_t i = 0; i < n; ++i) {
        chirplab::dataset::EmbeddingRecord rec;
        rec.recording_id = "rec" + std::to_string(i);
        rec.interval_start_sec = 0;
        rec.embedding.resize(d);
        for (double& v : rec.embedding) v = oracles::gaussian(rng);

        // Folder species: argmax of the fixed linear map, learnable from x.
        std::size_t best = 0;
        double best_dot = -1e300;
        for (std::size_t j = 0; j < c; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += rec.embedding[k] * map[k][j];
            if (dot > best_dot) {
                best_dot = dot;
                best = j;
            }
        }
        task.folder_species[rec.recording_id] = task.table.vocab.code_at(best);

        // Surrogate logits: one random class fires, uncorrelated with x.
        const std::size_t noisy = static_cast<std::size_t>(rng.next_below(c));
        rec.logits.assign(c, -2.0);
        rec.logits[noisy] = 2.0;

        task.table.records.push_back(std::move(rec));
    }
    return task;
}

}  // namespace testsupport

#endif
