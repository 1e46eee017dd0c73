#include "chirplab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "chirplab/common.hpp"
#include "chirplab/pseudolabel.hpp"
#include "chirplab/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace chirplab::dataset {

namespace {

std::vector<std::string> split_line(const std::string& line, char sep = ',') {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return in;
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    return out;
}

}  // namespace

SpeciesVocabulary::SpeciesVocabulary(std::vector<std::string> codes) : codes_(std::move(codes)) {
    std::unordered_set<std::string> seen;
    for (const auto& code : codes_) {
        if (code.empty()) {
            throw ValidationError("vocabulary: empty species code");
        }
        if (!seen.insert(code).second) {
            throw ValidationError("vocabulary: duplicate species code '" + code + "'");
        }
    }
}

std::optional<std::size_t> SpeciesVocabulary::index_of(const std::string& code) const {
    auto it = std::find(codes_.begin(), codes_.end(), code);
    if (it == codes_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - codes_.begin());
}

SpeciesVocabulary load_vocabulary(const std::string& path) {
    auto in = open_for_read(path);
    std::vector<std::string> codes;
    std::string line;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (!line.empty()) codes.push_back(line);
    }
    if (codes.empty()) {
        throw ValidationError("vocabulary '" + path + "' is empty");
    }
    return SpeciesVocabulary(std::move(codes));
}

void write_vocabulary(const SpeciesVocabulary& vocab, const std::string& path) {
    auto out = open_for_write(path);
    for (const auto& code : vocab.codes()) {
        out << code << '\n';
    }
}

EmbeddingTable load_embedding_table(const std::string& data_path, const std::string& manifest_path) {
    auto min = open_for_read(manifest_path);
    json manifest;
    try {
        manifest = json::parse(min);
    } catch (const json::exception& e) {
        throw ConfigError("manifest '" + manifest_path + "': " + e.what());
    }
    if (!manifest.contains("embedding_dim") || !manifest.contains("has_logits") ||
        !manifest.contains("vocabulary")) {
        throw ConfigError("manifest '" + manifest_path +
                          "' must declare embedding_dim, has_logits, vocabulary");
    }

    EmbeddingTable table;
    table.embedding_dim = manifest.at("embedding_dim").get<std::size_t>();
    table.has_logits = manifest.at("has_logits").get<bool>();
    table.source_tag = manifest.value("source_tag", std::string{});
    if (table.embedding_dim == 0) {
        throw ConfigError("manifest '" + manifest_path + "': embedding_dim must be positive");
    }

    fs::path vocab_path = manifest.at("vocabulary").get<std::string>();
    if (vocab_path.is_relative()) {
        vocab_path = fs::path(manifest_path).parent_path() / vocab_path;
    }
    table.vocab = load_vocabulary(vocab_path.string());

    const std::size_t dim = table.embedding_dim;
    const std::size_t num_classes = table.vocab.size();

    auto in = open_for_read(data_path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("embedding table '" + data_path + "' is empty");
    }
    auto header = split_line(strip_cr(line));

    std::vector<std::string> expected = {"recording_id", "interval_start_sec"};
    for (std::size_t i = 0; i < dim; ++i) expected.push_back("emb_" + std::to_string(i));
    if (table.has_logits) {
        for (std::size_t i = 0; i < num_classes; ++i) expected.push_back("logit_" + std::to_string(i));
    }
    if (header.size() != expected.size()) {
        throw ValidationError("embedding table '" + data_path + "': header has " +
                              std::to_string(header.size()) + " columns, manifest implies " +
                              std::to_string(expected.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (header[i] != expected[i]) {
            throw ValidationError("embedding table '" + data_path + "': column " +
                                  std::to_string(i) + " is '" + header[i] + "', expected '" +
                                  expected[i] + "'");
        }
    }

    std::unordered_set<std::string> seen_keys;
    std::size_t row_number = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_number;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_line(line);
        const std::string where = data_path + " row " + std::to_string(row_number);
        if (fields.size() != expected.size()) {
            throw ValidationError(where + ": has " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(expected.size()));
        }

        EmbeddingRecord rec;
        rec.recording_id = fields[0];
        if (rec.recording_id.empty()) {
            throw ValidationError(where + ": empty recording_id");
        }
        double start = parse_double(fields[1], false, where + " interval_start_sec");
        if (start < 0 || start > 2147483640.0 || start != std::floor(start) ||
            static_cast<long long>(start) % 5 != 0) {
            throw ValidationError(where + ": interval_start_sec '" + fields[1] +
                                  "' must be a non-negative multiple of 5");
        }
        rec.interval_start_sec = static_cast<int>(start);

        rec.embedding.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            rec.embedding.push_back(parse_double(fields[2 + i], false, where + " emb_" + std::to_string(i)));
        }
        if (table.has_logits) {
            rec.logits.reserve(num_classes);
            for (std::size_t i = 0; i < num_classes; ++i) {
                rec.logits.push_back(
                    parse_double(fields[2 + dim + i], true, where + " logit_" + std::to_string(i)));
            }
        }

        std::string key = rec.recording_id + "\x1f" + std::to_string(rec.interval_start_sec);
        if (!seen_keys.insert(key).second) {
            throw ValidationError(where + ": duplicate (recording_id, interval_start_sec) = (" +
                                  rec.recording_id + ", " +
                                  std::to_string(rec.interval_start_sec) + ")");
        }
        table.records.push_back(std::move(rec));
    }
    return table;
}

void write_embedding_table(const EmbeddingTable& table, const std::string& data_path) {
    auto out = open_for_write(data_path);
    out << "recording_id,interval_start_sec";
    for (std::size_t i = 0; i < table.embedding_dim; ++i) out << ",emb_" << i;
    if (table.has_logits) {
        for (std::size_t i = 0; i < table.vocab.size(); ++i) out << ",logit_" << i;
    }
    out << '\n';
    for (const auto& rec : table.records) {
        out << rec.recording_id << ',' << rec.interval_start_sec;
        for (double v : rec.embedding) out << ',' << format_double(v);
        if (table.has_logits) {
            for (double v : rec.logits) {
                if (std::isinf(v)) {
                    out << ",-inf";
                } else {
                    out << ',' << format_double(v);
                }
            }
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("failed writing embedding table '" + data_path + "'");
    }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("train_fraction must lie strictly between 0 and 1, got " +
                              format_double(train_fraction));
    }
    if (n == 0) {
        throw ValidationError("cannot split an empty table");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(seed);
    fisher_yates_shuffle(order, rng);
    std::size_t n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
    std::vector<std::size_t> val(order.begin() + n_train, order.end());
    return {std::move(train), std::move(val)};
}

SplitPair train_val_split(const EmbeddingTable& table, double train_fraction, std::uint64_t seed) {
    auto [train_idx, val_idx] = split_indices(table.size(), train_fraction, seed);
    SplitPair pair;
    pair.seed = seed;
    auto take = [&table](const std::vector<std::size_t>& idx) {
        EmbeddingTable sub;
        sub.embedding_dim = table.embedding_dim;
        sub.vocab = table.vocab;
        sub.source_tag = table.source_tag;
        sub.has_logits = table.has_logits;
        sub.records.reserve(idx.size());
        for (std::size_t i : idx) sub.records.push_back(table.records[i]);
        return sub;
    };
    pair.train = take(train_idx);
    pair.validation = take(val_idx);
    return pair;
}

std::vector<double> aggregate_windows(const std::vector<std::vector<double>>& windows) {
    if (windows.empty()) {
        throw ValidationError("aggregate_windows: no windows given");
    }
    const std::size_t dim = windows.front().size();
    for (const auto& w : windows) {
        if (w.size() != dim) {
            throw ValidationError("aggregate_windows: mixed window dimensions (" +
                                  std::to_string(dim) + " vs " + std::to_string(w.size()) + ")");
        }
    }
    // Mean about the first window as origin: identical windows average to
    // themselves exactly, since every deviation is 0.0.
    std::vector<double> mean(dim, 0.0);
    const auto& origin = windows.front();
    for (const auto& w : windows) {
        for (std::size_t i = 0; i < dim; ++i) mean[i] += w[i] - origin[i];
    }
    const double inv = 1.0 / static_cast<double>(windows.size());
    for (std::size_t i = 0; i < dim; ++i) mean[i] = origin[i] + mean[i] * inv;
    return mean;
}

std::vector<double> flatten_frames(const std::vector<std::vector<double>>& frames) {
    if (frames.empty() || frames.front().empty()) {
        throw ValidationError("flatten_frames: frame matrix must be at least 1x1");
    }
    const std::size_t k = frames.front().size();
    std::vector<double> flat;
    flat.reserve(frames.size() * k);
    for (const auto& row : frames) {
        if (row.size() != k) {
            throw ValidationError("flatten_frames: ragged rows (" + std::to_string(k) + " vs " +
                                  std::to_string(row.size()) + ")");
        }
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return flat;
}

DatasetSummary summarize_table(const EmbeddingTable& table, double threshold) {
    if (!table.has_logits) {
        throw ValidationError("summarize_table: table has no logits");
    }
    DatasetSummary summary;
    summary.interval_count = table.size();
    summary.total_hours = static_cast<double>(table.size()) * 5.0 / 3600.0;
    std::size_t with_call = 0;
    for (const auto& rec : table.records) {
        auto bits = pseudolabel::threshold_predictions(rec.logits, threshold);
        if (pseudolabel::call_indicator(bits)) ++with_call;
    }
    summary.call_fraction = table.size() == 0
                                ? 0.0
                                : static_cast<double>(with_call) / static_cast<double>(table.size());
    return summary;
}

}  // namespace chirplab::dataset
