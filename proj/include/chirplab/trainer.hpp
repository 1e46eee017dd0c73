#ifndef CHIRPLAB_TRAINER_HPP
#define CHIRPLAB_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chirplab/dataset.hpp"
#include "chirplab/losses.hpp"
#include "chirplab/matrix.hpp"
#include "chirplab/pseudolabel.hpp"

namespace chirplab::trainer {

/// hidden_dim 0 means a plain linear head; otherwise one ReLU hidden layer.
struct ModelArch {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t output_dim = 0;
};

struct Layer {
    Matrix weights;               // fan_in x fan_out
    std::vector<double> biases;   // fan_out
};

struct TrainingMeta {
    std::uint64_t seed = 0;
    std::size_t epochs_run = 0;
    std::string loss;
};

struct ClassifierModel {
    ModelArch arch;
    std::vector<Layer> layers;  // 1 (linear) or 2 (hidden + output)
    dataset::SpeciesVocabulary vocab;
    TrainingMeta meta;
};

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 1000;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    losses::LossSpec loss;
    double train_fraction = 0.8;
    bool species_augmentation = false;
    std::size_t hidden_dim = 0;  // 0 = linear head; 256 is the standard hidden width
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_macro_f1 = 0.0;
    double val_auroc = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

/// Glorot-uniform weights, zero biases, deterministic in the seed.
ClassifierModel init_model(const ModelArch& arch, std::uint64_t seed,
                           const dataset::SpeciesVocabulary& vocab = {});

/// Gradient of the batch loss with respect to every parameter, layer-aligned
/// with ClassifierModel::layers. This is the exact quantity the optimizer
/// consumes, exposed so it can be checked against finite differences.
struct LayerGradients {
    Matrix weights;
    std::vector<double> biases;
};
std::vector<LayerGradients> parameter_gradients(const ClassifierModel& model,
                                                const Matrix& embeddings, const Matrix& labels,
                                                const losses::LossSpec& spec);

/// Logits for a batch of embeddings; no final activation.
Matrix forward(const ClassifierModel& model, const Matrix& embeddings);

/// Mini-batch Adam over an internal train/validation row split
/// (config.train_fraction, config.seed). Returns the parameters from the
/// epoch with the best validation AUROC (ties: higher F1, then later epoch).
std::pair<ClassifierModel, TrainHistory> train(const dataset::EmbeddingTable& table,
                                               const pseudolabel::LabelMatrix& labels,
                                               const TrainConfig& config);

/// sigmoid(forward(...)), row-aligned with the table.
Matrix predict(const ClassifierModel& model, const dataset::EmbeddingTable& table);

/// JSON checkpoint; load(save(m)) reproduces m exactly.
void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);

/// Embeddings of a table as an N x D matrix.
Matrix embeddings_matrix(const dataset::EmbeddingTable& table);

/// Label rows as an N x C matrix of 0/1 doubles.
Matrix labels_matrix(const pseudolabel::LabelMatrix& labels);

}  // namespace chirplab::trainer

#endif
