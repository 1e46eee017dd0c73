#include "chirplab/pseudolabel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "chirplab/common.hpp"

namespace chirplab::pseudolabel {

double sigmoid(double x) {
    if (std::isnan(x)) {
        throw ValidationError("sigmoid: NaN input");
    }
    if (x == -std::numeric_limits<double>::infinity()) {
        return 0.0;
    }
    // Evaluate through the branch whose exp() argument is non-positive.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> sigmoid(const std::vector<double>& logits) {
    std::vector<double> probs;
    probs.reserve(logits.size());
    for (double x : logits) probs.push_back(sigmoid(x));
    return probs;
}

LabelVector threshold_predictions(const std::vector<double>& logits, double p_threshold) {
    if (!(p_threshold > 0.0 && p_threshold < 1.0)) {
        throw ValidationError("p_threshold must lie strictly between 0 and 1");
    }
    LabelVector bits;
    bits.reserve(logits.size());
    for (double x : logits) {
        bits.push_back(sigmoid(x) > p_threshold ? 1 : 0);
    }
    return bits;
}

std::uint8_t call_indicator(const LabelVector& label) {
    for (std::uint8_t b : label) {
        if (b) return 1;
    }
    return 0;
}

LabelVector species_onehot(const std::string& code, const dataset::SpeciesVocabulary& vocab) {
    auto idx = vocab.index_of(code);
    if (!idx) {
        throw ValidationError("unknown species code '" + code + "'");
    }
    LabelVector onehot(vocab.size(), 0);
    onehot[*idx] = 1;
    return onehot;
}

LabelVector augment_with_species(const LabelVector& y_hat, const LabelVector& onehot) {
    if (y_hat.size() != onehot.size()) {
        throw ValidationError("augment_with_species: length mismatch (" +
                              std::to_string(y_hat.size()) + " vs " +
                              std::to_string(onehot.size()) + ")");
    }
    const std::uint8_t call = call_indicator(y_hat);
    LabelVector out(y_hat.size());
    for (std::size_t i = 0; i < y_hat.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(y_hat[i] | (call & onehot[i]));
    }
    return out;
}

LabelMatrix build_label_matrix(const dataset::EmbeddingTable& table,
                               const std::map<std::string, std::string>& folder_species,
                               const PseudoLabelConfig& config) {
    if (!table.has_logits) {
        throw ValidationError("build_label_matrix: table has no logits");
    }
    if (config.use_species_augmentation) {
        std::set<std::string> missing;
        for (const auto& rec : table.records) {
            if (!folder_species.count(rec.recording_id)) missing.insert(rec.recording_id);
        }
        if (!missing.empty()) {
            std::ostringstream msg;
            msg << "build_label_matrix: species augmentation on but no folder species for:";
            for (const auto& id : missing) msg << ' ' << id;
            throw ValidationError(msg.str());
        }
    }

    LabelMatrix labels;
    labels.codes = table.vocab.codes();
    labels.recording_ids.reserve(table.size());
    labels.interval_starts.reserve(table.size());
    labels.rows.reserve(table.size());

    std::unordered_map<std::string, LabelVector> onehot_cache;
    for (const auto& rec : table.records) {
        LabelVector row = threshold_predictions(rec.logits, config.p_threshold);
        if (config.use_species_augmentation) {
            const std::string& code = folder_species.at(rec.recording_id);
            auto it = onehot_cache.find(code);
            if (it == onehot_cache.end()) {
                it = onehot_cache.emplace(code, species_onehot(code, table.vocab)).first;
            }
            row = augment_with_species(row, it->second);
        }
        labels.recording_ids.push_back(rec.recording_id);
        labels.interval_starts.push_back(rec.interval_start_sec);
        labels.rows.push_back(std::move(row));
    }
    return labels;
}

std::map<std::string, std::string> load_folder_species(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open folder-species map '" + path + "'");
    }
    std::map<std::string, std::string> map;
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("folder-species map '" + path + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "recording_id,species_code") {
        throw ValidationError("folder-species map '" + path +
                              "': expected header 'recording_id,species_code'");
    }
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == line.size()) {
            throw ValidationError("folder-species map '" + path + "' row " + std::to_string(row) +
                                  ": expected 'recording_id,species_code'");
        }
        std::string id = line.substr(0, comma);
        std::string code = line.substr(comma + 1);
        if (!map.emplace(id, code).second) {
            throw ValidationError("folder-species map '" + path + "': duplicate recording_id '" +
                                  id + "'");
        }
    }
    return map;
}

void write_label_matrix(const LabelMatrix& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << "recording_id,interval_start_sec";
    for (const auto& code : labels.codes) out << ',' << code;
    out << '\n';
    for (std::size_t r = 0; r < labels.size(); ++r) {
        out << labels.recording_ids[r] << ',' << labels.interval_starts[r];
        for (std::uint8_t b : labels.rows[r]) out << ',' << static_cast<int>(b);
        out << '\n';
    }
    if (!out) {
        throw IoError("failed writing label matrix '" + path + "'");
    }
}

LabelMatrix load_label_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open label matrix '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("label matrix '" + path + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                header.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        header.push_back(cur);
    }
    if (header.size() < 3 || header[0] != "recording_id" || header[1] != "interval_start_sec") {
        throw ValidationError("label matrix '" + path +
                              "': header must start with recording_id,interval_start_sec");
    }
    LabelMatrix labels;
    labels.codes.assign(header.begin() + 2, header.end());
    const std::size_t num_classes = labels.codes.size();

    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        const std::string where = path + " row " + std::to_string(row_number);
        if (fields.size() != num_classes + 2) {
            throw ValidationError(where + ": expected " + std::to_string(num_classes + 2) +
                                  " fields, got " + std::to_string(fields.size()));
        }
        labels.recording_ids.push_back(fields[0]);
        double start = parse_double(fields[1], false, where + " interval_start_sec");
        labels.interval_starts.push_back(static_cast<int>(start));
        LabelVector bits;
        bits.reserve(num_classes);
        for (std::size_t i = 0; i < num_classes; ++i) {
            const std::string& f = fields[2 + i];
            if (f == "0") {
                bits.push_back(0);
            } else if (f == "1") {
                bits.push_back(1);
            } else {
                throw ValidationError(where + ": label cell must be 0 or 1, got '" + f + "'");
            }
        }
        labels.rows.push_back(std::move(bits));
    }
    return labels;
}

}  // namespace chirplab::pseudolabel
