#include "chirplab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "chirplab/common.hpp"
#include "chirplab/metrics.hpp"
#include "chirplab/rng.hpp"

using nlohmann::json;

namespace chirplab::trainer {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void validate_arch(const ModelArch& arch) {
    if (arch.input_dim == 0 || arch.output_dim == 0) {
        throw ValidationError("model arch: input_dim and output_dim must be positive");
    }
}

Layer init_layer(std::size_t fan_in, std::size_t fan_out, SplitMix64& rng) {
    Layer layer;
    layer.weights = Matrix(fan_in, fan_out);
    layer.biases.assign(fan_out, 0.0);
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : layer.weights.data) {
        w = a * (2.0 * rng.next_double() - 1.0);
    }
    return layer;
}

// One generator per epoch, derived from (seed, epoch) so any epoch's batch
// order can be reproduced without replaying earlier epochs.
SplitMix64 epoch_rng(std::uint64_t seed, std::size_t epoch) {
    return SplitMix64(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(epoch));
}

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               double lr, std::size_t t) {
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * grad[i];
        state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }
}

struct ForwardCache {
    Matrix hidden_pre;   // B x H, only for hidden models
    Matrix hidden_post;  // relu(hidden_pre)
    Matrix logits;
};

ForwardCache forward_cached(const ClassifierModel& model, const Matrix& x) {
    ForwardCache cache;
    if (model.layers.size() == 1) {
        cache.logits = matmul(x, model.layers[0].weights);
        for (std::size_t r = 0; r < cache.logits.rows; ++r) {
            for (std::size_t c = 0; c < cache.logits.cols; ++c) {
                cache.logits(r, c) += model.layers[0].biases[c];
            }
        }
    } else {
        cache.hidden_pre = matmul(x, model.layers[0].weights);
        for (std::size_t r = 0; r < cache.hidden_pre.rows; ++r) {
            for (std::size_t c = 0; c < cache.hidden_pre.cols; ++c) {
                cache.hidden_pre(r, c) += model.layers[0].biases[c];
            }
        }
        cache.hidden_post = cache.hidden_pre;
        for (double& v : cache.hidden_post.data) v = std::max(v, 0.0);
        cache.logits = matmul(cache.hidden_post, model.layers[1].weights);
        for (std::size_t r = 0; r < cache.logits.rows; ++r) {
            for (std::size_t c = 0; c < cache.logits.cols; ++c) {
                cache.logits(r, c) += model.layers[1].biases[c];
            }
        }
    }
    return cache;
}

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

Gradients backward(const ClassifierModel& model, const Matrix& x, const ForwardCache& cache,
                   const Matrix& grad_logits) {
    Gradients grads;
    if (model.layers.size() == 1) {
        grads.weights.push_back(matmul_at(x, grad_logits));
        grads.biases.push_back(column_sums(grad_logits));
    } else {
        grads.weights.resize(2);
        grads.biases.resize(2);
        grads.weights[1] = matmul_at(cache.hidden_post, grad_logits);
        grads.biases[1] = column_sums(grad_logits);
        Matrix grad_hidden = matmul_bt(grad_logits, model.layers[1].weights);
        for (std::size_t i = 0; i < grad_hidden.data.size(); ++i) {
            if (cache.hidden_pre.data[i] <= 0.0) grad_hidden.data[i] = 0.0;
        }
        grads.weights[0] = matmul_at(x, grad_hidden);
        grads.biases[0] = column_sums(grad_hidden);
    }
    return grads;
}

Matrix take_rows(const Matrix& src, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), src.cols);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t c = 0; c < src.cols; ++c) {
            out(r, c) = src(idx[r], c);
        }
    }
    return out;
}

}  // namespace

ClassifierModel init_model(const ModelArch& arch, std::uint64_t seed,
                           const dataset::SpeciesVocabulary& vocab) {
    validate_arch(arch);
    if (vocab.size() != 0 && vocab.size() != arch.output_dim) {
        throw ValidationError("init_model: vocabulary size " + std::to_string(vocab.size()) +
                              " does not match output_dim " + std::to_string(arch.output_dim));
    }
    ClassifierModel model;
    model.arch = arch;
    model.vocab = vocab;
    model.meta.seed = seed;
    SplitMix64 rng(seed);
    if (arch.hidden_dim == 0) {
        model.layers.push_back(init_layer(arch.input_dim, arch.output_dim, rng));
    } else {
        model.layers.push_back(init_layer(arch.input_dim, arch.hidden_dim, rng));
        model.layers.push_back(init_layer(arch.hidden_dim, arch.output_dim, rng));
    }
    return model;
}

Matrix forward(const ClassifierModel& model, const Matrix& embeddings) {
    if (embeddings.cols != model.arch.input_dim) {
        throw ValidationError("forward: embeddings have dim " + std::to_string(embeddings.cols) +
                              ", model expects " + std::to_string(model.arch.input_dim));
    }
    return forward_cached(model, embeddings).logits;
}

std::vector<LayerGradients> parameter_gradients(const ClassifierModel& model,
                                                const Matrix& embeddings, const Matrix& labels,
                                                const losses::LossSpec& spec) {
    if (embeddings.cols != model.arch.input_dim) {
        throw ValidationError("parameter_gradients: embedding dim mismatch");
    }
    const ForwardCache cache = forward_cached(model, embeddings);
    const losses::LossResult loss = losses::compute_loss(spec, cache.logits, labels);
    const Gradients grads = backward(model, embeddings, cache, loss.grad_logits);
    std::vector<LayerGradients> out;
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        out.push_back({grads.weights[l], grads.biases[l]});
    }
    return out;
}

Matrix embeddings_matrix(const dataset::EmbeddingTable& table) {
    Matrix x(table.size(), table.embedding_dim);
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (std::size_t c = 0; c < table.embedding_dim; ++c) {
            x(r, c) = table.records[r].embedding[c];
        }
    }
    return x;
}

Matrix labels_matrix(const pseudolabel::LabelMatrix& labels) {
    Matrix y(labels.size(), labels.num_classes());
    for (std::size_t r = 0; r < labels.size(); ++r) {
        for (std::size_t c = 0; c < labels.num_classes(); ++c) {
            y(r, c) = labels.rows[r][c];
        }
    }
    return y;
}

std::pair<ClassifierModel, TrainHistory> train(const dataset::EmbeddingTable& table,
                                               const pseudolabel::LabelMatrix& labels,
                                               const TrainConfig& config) {
    if (labels.size() != table.size()) {
        throw ValidationError("train: table has " + std::to_string(table.size()) +
                              " rows but labels have " + std::to_string(labels.size()));
    }
    for (std::size_t r = 0; r < table.size(); ++r) {
        if (labels.recording_ids[r] != table.records[r].recording_id ||
            labels.interval_starts[r] != table.records[r].interval_start_sec) {
            throw ValidationError("train: labels not row-aligned with table at row " +
                                  std::to_string(r));
        }
    }
    if (labels.codes != table.vocab.codes()) {
        throw ValidationError("train: label columns do not match the table vocabulary");
    }
    if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0.0)) {
        throw ValidationError("train: epochs >= 1, batch_size >= 1, learning_rate > 0 required");
    }

    const Matrix all_x = embeddings_matrix(table);
    const Matrix all_y = labels_matrix(labels);
    bool any_positive = false;
    for (double v : all_y.data) {
        if (v == 1.0) {
            any_positive = true;
            break;
        }
    }
    if (!any_positive) {
        throw ValidationError("train: label matrix has no positive label");
    }

    auto [train_idx, val_idx] = dataset::split_indices(table.size(), config.train_fraction,
                                                       config.seed);
    if (train_idx.empty() || val_idx.empty()) {
        throw ValidationError("train: split (" + std::to_string(train_idx.size()) + ", " +
                              std::to_string(val_idx.size()) +
                              ") leaves one side empty; add rows or adjust train_fraction");
    }
    const Matrix train_x = take_rows(all_x, train_idx);
    const Matrix train_y = take_rows(all_y, train_idx);
    const Matrix val_x = take_rows(all_x, val_idx);
    const Matrix val_y = take_rows(all_y, val_idx);

    ModelArch arch;
    arch.input_dim = table.embedding_dim;
    arch.hidden_dim = config.hidden_dim;
    arch.output_dim = table.vocab.size();
    ClassifierModel model = init_model(arch, config.seed, table.vocab);
    model.meta.loss = losses::loss_name(config.loss.kind);

    std::vector<AdamState> weight_state(model.layers.size());
    std::vector<AdamState> bias_state(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        weight_state[l].m.assign(model.layers[l].weights.data.size(), 0.0);
        weight_state[l].v.assign(model.layers[l].weights.data.size(), 0.0);
        bias_state[l].m.assign(model.layers[l].biases.size(), 0.0);
        bias_state[l].v.assign(model.layers[l].biases.size(), 0.0);
    }

    TrainHistory history;
    ClassifierModel best_model = model;
    double best_auroc = -1.0;
    double best_f1 = -1.0;
    std::size_t adam_t = 0;

    std::vector<std::size_t> batch_order(train_x.rows);
    std::iota(batch_order.begin(), batch_order.end(), 0);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        auto rng = epoch_rng(config.seed, epoch);
        fisher_yates_shuffle(batch_order, rng);

        double epoch_loss_sum = 0.0;
        std::size_t epoch_rows = 0;
        for (std::size_t start = 0; start < batch_order.size(); start += config.batch_size) {
            const std::size_t end = std::min(start + config.batch_size, batch_order.size());
            std::vector<std::size_t> batch(batch_order.begin() + start, batch_order.begin() + end);
            const Matrix bx = take_rows(train_x, batch);
            const Matrix by = take_rows(train_y, batch);

            const ForwardCache cache = forward_cached(model, bx);
            const losses::LossResult loss = losses::compute_loss(config.loss, cache.logits, by);
            if (!std::isfinite(loss.value)) {
                throw ValidationError("train: non-finite loss " + format_double(loss.value) +
                                      " at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(start / config.batch_size + 1));
            }
            epoch_loss_sum += loss.value * static_cast<double>(batch.size());
            epoch_rows += batch.size();

            const Gradients grads = backward(model, bx, cache, loss.grad_logits);
            ++adam_t;
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                adam_step(model.layers[l].weights.data, grads.weights[l].data, weight_state[l],
                          config.learning_rate, adam_t);
                adam_step(model.layers[l].biases, grads.biases[l], bias_state[l],
                          config.learning_rate, adam_t);
            }
        }

        // Validation diagnostics on this epoch's parameters.
        const Matrix val_logits = forward_cached(model, val_x).logits;
        Matrix val_probs(val_logits.rows, val_logits.cols);
        Matrix val_bits(val_logits.rows, val_logits.cols);
        for (std::size_t i = 0; i < val_logits.data.size(); ++i) {
            val_probs.data[i] = pseudolabel::sigmoid(val_logits.data[i]);
            val_bits.data[i] = val_probs.data[i] > 0.5 ? 1.0 : 0.0;
        }
        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss_sum / static_cast<double>(epoch_rows);
        record.val_macro_f1 = metrics::macro_f1(val_bits, val_y);
        record.val_auroc = metrics::macro_auroc(val_probs, val_y).first;
        history.push_back(record);

        if (record.val_auroc > best_auroc ||
            (record.val_auroc == best_auroc && record.val_macro_f1 >= best_f1)) {
            best_auroc = record.val_auroc;
            best_f1 = record.val_macro_f1;
            best_model = model;
        }
    }

    best_model.meta.seed = config.seed;
    best_model.meta.epochs_run = config.epochs;
    best_model.meta.loss = losses::loss_name(config.loss.kind);
    return {std::move(best_model), std::move(history)};
}

Matrix predict(const ClassifierModel& model, const dataset::EmbeddingTable& table) {
    if (table.embedding_dim != model.arch.input_dim) {
        throw ValidationError("predict: table dim " + std::to_string(table.embedding_dim) +
                              " does not match model input dim " +
                              std::to_string(model.arch.input_dim));
    }
    Matrix logits = forward(model, embeddings_matrix(table));
    for (double& v : logits.data) v = pseudolabel::sigmoid(v);
    return logits;
}

void save_model(const ClassifierModel& model, const std::string& path) {
    json j;
    j["schema"] = 1;
    j["arch"] = {{"input_dim", model.arch.input_dim},
                 {"hidden_dim", model.arch.hidden_dim},
                 {"output_dim", model.arch.output_dim}};
    j["vocab"] = model.vocab.codes();
    j["layers"] = json::array();
    for (const auto& layer : model.layers) {
        json rows = json::array();
        for (std::size_t r = 0; r < layer.weights.rows; ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < layer.weights.cols; ++c) {
                row.push_back(layer.weights(r, c));
            }
            rows.push_back(std::move(row));
        }
        j["layers"].push_back({{"w", std::move(rows)}, {"b", layer.biases}});
    }
    j["meta"] = {{"seed", model.meta.seed},
                 {"epochs_run", model.meta.epochs_run},
                 {"loss", model.meta.loss}};
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open checkpoint '" + path + "' for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing checkpoint '" + path + "'");
    }
}

ClassifierModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open checkpoint '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("checkpoint '" + path + "': invalid JSON: " + e.what());
    }

    auto need = [&](const json& obj, const char* field) -> const json& {
        if (!obj.contains(field)) {
            throw ValidationError("checkpoint '" + path + "': missing field '" +
                                  std::string(field) + "'");
        }
        return obj.at(field);
    };

    if (need(j, "schema").get<int>() != 1) {
        throw ValidationError("checkpoint '" + path + "': unsupported schema version " +
                              j["schema"].dump());
    }
    ClassifierModel model;
    const json& arch = need(j, "arch");
    model.arch.input_dim = need(arch, "input_dim").get<std::size_t>();
    model.arch.hidden_dim = need(arch, "hidden_dim").get<std::size_t>();
    model.arch.output_dim = need(arch, "output_dim").get<std::size_t>();
    validate_arch(model.arch);

    model.vocab = dataset::SpeciesVocabulary(need(j, "vocab").get<std::vector<std::string>>());
    if (model.vocab.size() != 0 && model.vocab.size() != model.arch.output_dim) {
        throw ValidationError("checkpoint '" + path + "': field 'vocab' has " +
                              std::to_string(model.vocab.size()) + " codes, arch expects " +
                              std::to_string(model.arch.output_dim));
    }

    const json& layers = need(j, "layers");
    const std::size_t expected_layers = model.arch.hidden_dim == 0 ? 1 : 2;
    if (!layers.is_array() || layers.size() != expected_layers) {
        throw ValidationError("checkpoint '" + path + "': field 'layers' must hold " +
                              std::to_string(expected_layers) + " entries");
    }
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    if (expected_layers == 1) {
        shapes = {{model.arch.input_dim, model.arch.output_dim}};
    } else {
        shapes = {{model.arch.input_dim, model.arch.hidden_dim},
                  {model.arch.hidden_dim, model.arch.output_dim}};
    }
    for (std::size_t l = 0; l < expected_layers; ++l) {
        const json& jw = need(layers[l], "w");
        const json& jb = need(layers[l], "b");
        Layer layer;
        layer.weights = Matrix(shapes[l].first, shapes[l].second);
        if (!jw.is_array() || jw.size() != shapes[l].first) {
            throw ValidationError("checkpoint '" + path + "': layer " + std::to_string(l) +
                                  " field 'w' must have " + std::to_string(shapes[l].first) +
                                  " rows");
        }
        for (std::size_t r = 0; r < shapes[l].first; ++r) {
            if (!jw[r].is_array() || jw[r].size() != shapes[l].second) {
                throw ValidationError("checkpoint '" + path + "': layer " + std::to_string(l) +
                                      " field 'w' row " + std::to_string(r) + " must have " +
                                      std::to_string(shapes[l].second) + " entries");
            }
            for (std::size_t c = 0; c < shapes[l].second; ++c) {
                layer.weights(r, c) = jw[r][c].get<double>();
            }
        }
        layer.biases = jb.get<std::vector<double>>();
        if (layer.biases.size() != shapes[l].second) {
            throw ValidationError("checkpoint '" + path + "': layer " + std::to_string(l) +
                                  " field 'b' must have " + std::to_string(shapes[l].second) +
                                  " entries");
        }
        for (double v : layer.weights.data) {
            if (!std::isfinite(v)) {
                throw ValidationError("checkpoint '" + path + "': non-finite weight in layer " +
                                      std::to_string(l));
            }
        }
        for (double v : layer.biases) {
            if (!std::isfinite(v)) {
                throw ValidationError("checkpoint '" + path + "': non-finite bias in layer " +
                                      std::to_string(l));
            }
        }
        model.layers.push_back(std::move(layer));
    }

    const json& meta = need(j, "meta");
    model.meta.seed = need(meta, "seed").get<std::uint64_t>();
    model.meta.epochs_run = need(meta, "epochs_run").get<std::size_t>();
    model.meta.loss = need(meta, "loss").get<std::string>();
    return model;
}

}  // namespace chirplab::trainer
