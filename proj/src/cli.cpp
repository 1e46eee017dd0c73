#include "chirplab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chirplab/common.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace chirplab::cli {

namespace {

std::string resolve(const fs::path& base_dir, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_relative()) p = base_dir / p;
    return p.string();
}

losses::LossSpec parse_loss_spec(const json& train) {
    losses::LossSpec spec;
    const std::string name = train.value("loss", std::string("bce"));
    if (name == "bce") {
        spec.kind = losses::LossKind::Bce;
    } else if (name == "asl") {
        spec.kind = losses::LossKind::Asl;
    } else if (name == "sigmoidf1") {
        spec.kind = losses::LossKind::SigmoidF1;
    } else {
        throw ConfigError("train.loss must be bce, asl, or sigmoidf1; got '" + name + "'");
    }
    spec.asl.gamma_pos = train.value("gamma_pos", 1.0);
    spec.asl.gamma_neg = train.value("gamma_neg", 4.0);
    spec.asl.margin = train.value("margin", 0.05);
    // Sweep convention: S = -beta, E = eta.
    const double s = train.value("S", -1.0);
    if (!(s < 0.0)) {
        throw ConfigError("train.S must be negative (S = -beta), got " + format_double(s));
    }
    spec.f1.beta = -s;
    spec.f1.eta = train.value("E", 0.0);
    return spec;
}

json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(std::string(what) + " '" + path + "' cannot be opened");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + " '" + path + "': " + e.what());
    }
}

dataset::EmbeddingTable load_table(const PipelineConfig& config) {
    if (config.embedding_table.empty() || config.manifest.empty()) {
        throw ConfigError("config must set paths.embedding_table and paths.manifest");
    }
    if (!fs::exists(config.embedding_table)) {
        throw ConfigError("paths.embedding_table '" + config.embedding_table + "' does not exist");
    }
    if (!fs::exists(config.manifest)) {
        throw ConfigError("paths.manifest '" + config.manifest + "' does not exist");
    }
    auto table = dataset::load_embedding_table(config.embedding_table, config.manifest);
    if (!config.vocabulary.empty()) {
        table.vocab = dataset::load_vocabulary(config.vocabulary);
        for (auto& rec : table.records) {
            if (!rec.logits.empty() && rec.logits.size() != table.vocab.size()) {
                throw ConfigError("paths.vocabulary override has " +
                                  std::to_string(table.vocab.size()) +
                                  " codes but the table carries " +
                                  std::to_string(rec.logits.size()) + " logit columns");
            }
        }
    }
    return table;
}

std::string ensure_output_dir(const PipelineConfig& config) {
    if (config.output_dir.empty()) {
        throw ConfigError("config must set paths.output_dir");
    }
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) {
        throw IoError("cannot create output_dir '" + config.output_dir + "': " + ec.message());
    }
    return config.output_dir;
}

json config_echo(const PipelineConfig& config) {
    json j;
    j["paths"] = {{"embedding_table", config.embedding_table},
                  {"manifest", config.manifest},
                  {"vocabulary", config.vocabulary},
                  {"folder_species_map", config.folder_species_map},
                  {"output_dir", config.output_dir}};
    j["pseudolabel"] = {{"p_threshold", config.pseudo.p_threshold},
                        {"use_species_augmentation", config.pseudo.use_species_augmentation}};
    json train = {{"epochs", config.train.epochs},
                  {"batch_size", config.train.batch_size},
                  {"learning_rate", config.train.learning_rate},
                  {"seed", config.train.seed},
                  {"train_fraction", config.train.train_fraction},
                  {"hidden_dim", config.train.hidden_dim},
                  {"species_augmentation", config.train.species_augmentation},
                  {"loss", losses::loss_name(config.train.loss.kind)}};
    if (config.train.loss.kind == losses::LossKind::Asl) {
        train["gamma_pos"] = config.train.loss.asl.gamma_pos;
        train["gamma_neg"] = config.train.loss.asl.gamma_neg;
        train["margin"] = config.train.loss.asl.margin;
    } else if (config.train.loss.kind == losses::LossKind::SigmoidF1) {
        train["S"] = -config.train.loss.f1.beta;
        train["E"] = config.train.loss.f1.eta;
    }
    j["train"] = std::move(train);
    j["mining"] = {{"min_support", config.mining.min_support},
                   {"min_confidence", config.mining.min_confidence},
                   {"per_interval", config.mining.per_interval},
                   {"histogram_kind", config.mining.histogram_kind}};
    if (config.mining.min_support_fraction) {
        j["mining"]["min_support_fraction"] = *config.mining.min_support_fraction;
    }
    j["evaluation"] = {{"threshold", config.evaluation_threshold}};
    return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
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
    return fields;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    json j = read_json_file(path, "config");
    const fs::path base = fs::path(path).parent_path();

    PipelineConfig config;
    if (j.contains("paths")) {
        const json& p = j["paths"];
        config.embedding_table = resolve(base, p.value("embedding_table", std::string{}));
        config.manifest = resolve(base, p.value("manifest", std::string{}));
        config.vocabulary = resolve(base, p.value("vocabulary", std::string{}));
        config.folder_species_map = resolve(base, p.value("folder_species_map", std::string{}));
        config.output_dir = resolve(base, p.value("output_dir", std::string{}));
    }
    if (j.contains("pseudolabel")) {
        const json& p = j["pseudolabel"];
        config.pseudo.p_threshold = p.value("p_threshold", 0.5);
        config.pseudo.use_species_augmentation = p.value("use_species_augmentation", false);
    }
    if (!(config.pseudo.p_threshold > 0.0 && config.pseudo.p_threshold < 1.0)) {
        throw ConfigError("pseudolabel.p_threshold must lie strictly between 0 and 1");
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        config.train.epochs = t.value("epochs", static_cast<std::size_t>(20));
        config.train.batch_size = t.value("batch_size", static_cast<std::size_t>(1000));
        config.train.learning_rate = t.value("learning_rate", 1e-3);
        config.train.seed = t.value("seed", static_cast<std::uint64_t>(0));
        config.train.train_fraction = t.value("train_fraction", 0.8);
        config.train.hidden_dim = t.value("hidden_dim", static_cast<std::size_t>(0));
        config.train.species_augmentation = t.value("species_augmentation", false);
        config.train.loss = parse_loss_spec(t);
    }
    if (j.contains("mining")) {
        const json& m = j["mining"];
        config.mining.min_support = m.value("min_support", static_cast<std::size_t>(1));
        if (m.contains("min_support_fraction")) {
            config.mining.min_support_fraction = m["min_support_fraction"].get<double>();
        }
        config.mining.min_confidence = m.value("min_confidence", 0.8);
        config.mining.per_interval = m.value("per_interval", false);
        config.mining.histogram_kind = m.value("histogram_kind", std::string("transactions"));
        if (config.mining.histogram_kind != "transactions" &&
            config.mining.histogram_kind != "itemsets") {
            throw ConfigError("mining.histogram_kind must be 'transactions' or 'itemsets'");
        }
    }
    if (j.contains("evaluation")) {
        config.evaluation_threshold = j["evaluation"].value("threshold", 0.5);
    }
    return config;
}

void write_run_manifest(const std::string& command, const std::string& output_dir,
                        const std::string& config_echo_json,
                        const std::vector<std::string>& artifact_paths) {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = json::parse(config_echo_json);
    json artifacts = json::object();
    for (const auto& path : artifact_paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw IoError("run manifest: cannot hash missing artifact '" + path + "'");
        }
        std::ostringstream bytes;
        bytes << in.rdbuf();
        artifacts[fs::path(path).filename().string()] = hash_hex(fnv1a64(bytes.str()));
    }
    manifest["artifacts"] = std::move(artifacts);

    const fs::path out_path = fs::path(output_dir) / (command + "_manifest.json");
    std::ofstream out(out_path);
    if (!out) {
        throw IoError("cannot write run manifest '" + out_path.string() + "'");
    }
    out << manifest.dump(2) << '\n';
}

std::string cmd_pseudolabel(const PipelineConfig& config) {
    auto table = load_table(config);
    if (!table.has_logits) {
        throw ValidationError("pseudolabel: the table has no logit columns");
    }
    const std::string out_dir = ensure_output_dir(config);

    std::map<std::string, std::string> folder_species;
    if (config.pseudo.use_species_augmentation) {
        if (config.folder_species_map.empty()) {
            throw ConfigError(
                "pseudolabel: species augmentation is on but paths.folder_species_map is unset");
        }
        if (!fs::exists(config.folder_species_map)) {
            throw ConfigError("paths.folder_species_map '" + config.folder_species_map +
                              "' does not exist");
        }
        folder_species = pseudolabel::load_folder_species(config.folder_species_map);
    }

    auto labels = pseudolabel::build_label_matrix(table, folder_species, config.pseudo);
    const std::string labels_path = (fs::path(out_dir) / "labels.csv").string();
    pseudolabel::write_label_matrix(labels, labels_path);

    const auto summary = dataset::summarize_table(table, config.pseudo.p_threshold);
    json sj;
    sj["interval_count"] = summary.interval_count;
    sj["total_hours"] = summary.total_hours;
    sj["call_fraction"] = summary.call_fraction;
    sj["source_tag"] = table.source_tag;
    const std::string summary_path = (fs::path(out_dir) / "pseudolabel_summary.json").string();
    {
        std::ofstream out(summary_path);
        if (!out) throw IoError("cannot write '" + summary_path + "'");
        out << sj.dump(2) << '\n';
    }
    write_run_manifest("pseudolabel", out_dir, config_echo(config).dump(),
                       {labels_path, summary_path});
    return labels_path;
}

TrainOutputs cmd_train(const PipelineConfig& config, const std::string& labels_path) {
    auto table = load_table(config);
    if (!fs::exists(labels_path)) {
        throw ConfigError("train: label matrix '" + labels_path + "' does not exist");
    }
    auto labels = pseudolabel::load_label_matrix(labels_path);
    const std::string out_dir = ensure_output_dir(config);

    auto [model, history] = trainer::train(table, labels, config.train);

    TrainOutputs outputs;
    outputs.checkpoint_path = (fs::path(out_dir) / "checkpoint.json").string();
    trainer::save_model(model, outputs.checkpoint_path);

    outputs.history_path = (fs::path(out_dir) / "history.csv").string();
    {
        std::ofstream out(outputs.history_path);
        if (!out) throw IoError("cannot write '" + outputs.history_path + "'");
        out << "epoch,train_loss,val_macro_f1,val_auroc\n";
        for (const auto& record : history) {
            out << record.epoch << ',' << format_double(record.train_loss) << ','
                << format_double(record.val_macro_f1) << ',' << format_double(record.val_auroc)
                << '\n';
        }
    }

    // Final report: the selected model scored on the validation rows.
    auto [train_idx, val_idx] =
        dataset::split_indices(table.size(), config.train.train_fraction, config.train.seed);
    dataset::EmbeddingTable val_table;
    val_table.embedding_dim = table.embedding_dim;
    val_table.vocab = table.vocab;
    val_table.source_tag = table.source_tag;
    val_table.has_logits = table.has_logits;
    Matrix val_labels(val_idx.size(), labels.num_classes());
    for (std::size_t r = 0; r < val_idx.size(); ++r) {
        val_table.records.push_back(table.records[val_idx[r]]);
        for (std::size_t c = 0; c < labels.num_classes(); ++c) {
            val_labels(r, c) = labels.rows[val_idx[r]][c];
        }
    }
    const Matrix val_scores = trainer::predict(model, val_table);
    const auto report =
        metrics::evaluate(val_scores, val_labels, table.vocab.codes(), config.evaluation_threshold);
    outputs.report_path = (fs::path(out_dir) / "validation_report.json").string();
    {
        std::ofstream out(outputs.report_path);
        if (!out) throw IoError("cannot write '" + outputs.report_path + "'");
        out << metrics::report_to_json(report) << '\n';
    }

    write_run_manifest("train", out_dir, config_echo(config).dump(),
                       {outputs.checkpoint_path, outputs.history_path, outputs.report_path});
    return outputs;
}

std::string cmd_predict(const PipelineConfig& config, const std::string& checkpoint_path,
                        const std::string& out_path) {
    auto table = load_table(config);
    if (!fs::exists(checkpoint_path)) {
        throw ConfigError("predict: checkpoint '" + checkpoint_path + "' does not exist");
    }
    auto model = trainer::load_model(checkpoint_path);
    if (!(model.vocab == table.vocab)) {
        std::ostringstream msg;
        msg << "predict: checkpoint vocabulary differs from the table's;";
        msg << " checkpoint-only:";
        for (const auto& code : model.vocab.codes()) {
            if (!table.vocab.index_of(code)) msg << ' ' << code;
        }
        msg << " table-only:";
        for (const auto& code : table.vocab.codes()) {
            if (!model.vocab.index_of(code)) msg << ' ' << code;
        }
        throw ValidationError(msg.str());
    }

    const Matrix probs = trainer::predict(model, table);
    const std::string out_dir = ensure_output_dir(config);
    std::string path = out_path.empty() ? (fs::path(out_dir) / "predictions.csv").string()
                                        : out_path;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write predictions '" + path + "'");
    out << "row_id";
    for (const auto& code : model.vocab.codes()) out << ',' << code;
    out << '\n';
    for (std::size_t r = 0; r < table.size(); ++r) {
        const auto& rec = table.records[r];
        out << rec.recording_id << '_' << (rec.interval_start_sec + 5);
        for (std::size_t c = 0; c < probs.cols; ++c) out << ',' << format_double(probs(r, c));
        out << '\n';
    }
    out.close();

    json echo = config_echo(config);
    echo["checkpoint"] = checkpoint_path;
    write_run_manifest("predict", out_dir, echo.dump(), {path});
    return path;
}

metrics::EvalReport cmd_evaluate(const std::string& predictions_path,
                                 const std::string& labels_path, double decision_threshold,
                                 const std::string& report_out) {
    std::ifstream pin(predictions_path);
    if (!pin) throw IoError("cannot open predictions '" + predictions_path + "'");
    std::string line;
    if (!std::getline(pin, line)) {
        throw ValidationError("predictions '" + predictions_path + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto pred_header = split_csv_line(line);
    if (pred_header.size() < 2 || pred_header[0] != "row_id") {
        throw ValidationError("predictions '" + predictions_path +
                              "': header must be row_id,<codes...>");
    }
    const std::vector<std::string> codes(pred_header.begin() + 1, pred_header.end());

    std::vector<std::string> pred_row_ids;
    std::vector<std::vector<double>> pred_rows;
    std::size_t row_number = 1;
    while (std::getline(pin, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != codes.size() + 1) {
            throw ValidationError("predictions row " + std::to_string(row_number) +
                                  ": wrong field count");
        }
        pred_row_ids.push_back(fields[0]);
        std::vector<double> row;
        row.reserve(codes.size());
        for (std::size_t i = 0; i < codes.size(); ++i) {
            row.push_back(parse_double(fields[1 + i], false,
                                       "predictions row " + std::to_string(row_number)));
        }
        pred_rows.push_back(std::move(row));
    }

    auto labels = pseudolabel::load_label_matrix(labels_path);
    if (labels.codes != codes) {
        throw ValidationError("evaluate: label columns do not match prediction columns");
    }
    if (labels.size() != pred_rows.size()) {
        throw ValidationError("evaluate: " + std::to_string(pred_rows.size()) +
                              " prediction rows vs " + std::to_string(labels.size()) +
                              " label rows");
    }
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const std::string expected =
            labels.recording_ids[r] + "_" + std::to_string(labels.interval_starts[r] + 5);
        if (pred_row_ids[r] != expected) {
            throw ValidationError("evaluate: row_id mismatch at row " + std::to_string(r + 2) +
                                  ": predictions have '" + pred_row_ids[r] + "', labels imply '" +
                                  expected + "'");
        }
    }

    Matrix scores(pred_rows.size(), codes.size());
    Matrix truth(pred_rows.size(), codes.size());
    for (std::size_t r = 0; r < pred_rows.size(); ++r) {
        for (std::size_t c = 0; c < codes.size(); ++c) {
            scores(r, c) = pred_rows[r][c];
            truth(r, c) = labels.rows[r][c];
        }
    }
    auto report = metrics::evaluate(scores, truth, codes, decision_threshold);
    if (!report_out.empty()) {
        std::ofstream out(report_out);
        if (!out) throw IoError("cannot write report '" + report_out + "'");
        out << metrics::report_to_json(report) << '\n';
        out.close();
        json echo = {{"predictions", predictions_path},
                     {"labels", labels_path},
                     {"threshold", decision_threshold}};
        write_run_manifest("evaluate", fs::path(report_out).parent_path().string(), echo.dump(),
                           {report_out});
    }
    return report;
}

MineOutputs cmd_mine(const PipelineConfig& config, const std::string& labels_path) {
    if (!fs::exists(labels_path)) {
        throw ConfigError("mine: label matrix '" + labels_path + "' does not exist");
    }
    auto labels = pseudolabel::load_label_matrix(labels_path);
    const std::string out_dir = ensure_output_dir(config);

    auto transactions = cooccur::build_transactions(labels, config.mining.per_interval);
    std::size_t min_support = config.mining.min_support;
    if (config.mining.min_support_fraction) {
        min_support = cooccur::min_support_from_fraction(*config.mining.min_support_fraction,
                                                         transactions.size());
    }
    auto itemsets = cooccur::fpgrowth(transactions, min_support);
    auto rules = cooccur::association_rules(itemsets, config.mining.min_confidence);

    MineOutputs outputs;
    outputs.itemsets_path = (fs::path(out_dir) / "itemsets.csv").string();
    cooccur::write_itemsets_csv(itemsets, outputs.itemsets_path);
    outputs.rules_path = (fs::path(out_dir) / "rules.csv").string();
    cooccur::write_rules_csv(rules, outputs.rules_path);

    outputs.histogram_path = (fs::path(out_dir) / "size_histogram.csv").string();
    {
        std::map<std::size_t, double> counts;
        std::map<std::size_t, double> fractions;
        if (config.mining.histogram_kind == "itemsets") {
            counts = cooccur::frequent_itemset_size_distribution(itemsets, false);
            fractions = cooccur::frequent_itemset_size_distribution(itemsets, true);
        } else {
            counts = cooccur::itemset_size_distribution(transactions, false);
            fractions = cooccur::itemset_size_distribution(transactions, true);
        }
        std::ofstream out(outputs.histogram_path);
        if (!out) throw IoError("cannot write '" + outputs.histogram_path + "'");
        out << "size,count,fraction\n";
        for (const auto& [size, count] : counts) {
            out << size << ',' << static_cast<std::size_t>(count) << ','
                << format_double(fractions[size]) << '\n';
        }
    }

    outputs.rule_graph_path = (fs::path(out_dir) / "rule_graph.csv").string();
    cooccur::export_rule_graph(rules, outputs.rule_graph_path);

    write_run_manifest("mine", out_dir, config_echo(config).dump(),
                       {outputs.itemsets_path, outputs.rules_path, outputs.histogram_path,
                        outputs.rule_graph_path});
    return outputs;
}

profiler::BudgetReport cmd_profile(const PipelineConfig& config,
                                   const std::string& checkpoint_path, std::size_t repetitions,
                                   const profiler::BudgetSpec& budget) {
    auto table = load_table(config);
    std::vector<std::string> recordings;
    for (const auto& rec : table.records) recordings.push_back(rec.recording_id);
    std::sort(recordings.begin(), recordings.end());
    recordings.erase(std::unique(recordings.begin(), recordings.end()), recordings.end());
    if (recordings.empty()) {
        throw ValidationError("profile: the table has no recordings");
    }

    std::vector<profiler::Stage> stages;
    stages.push_back({"table_load", [&config](const std::vector<std::string>&) {
                          dataset::load_embedding_table(config.embedding_table, config.manifest);
                      }});
    if (table.has_logits) {
        stages.push_back({"pseudolabel", [&table, &config](const std::vector<std::string>&) {
                              pseudolabel::PseudoLabelConfig pl;
                              pl.p_threshold = config.pseudo.p_threshold;
                              pl.use_species_augmentation = false;
                              pseudolabel::build_label_matrix(table, {}, pl);
                          }});
    }
    trainer::ClassifierModel model;
    if (!checkpoint_path.empty()) {
        if (!fs::exists(checkpoint_path)) {
            throw ConfigError("profile: checkpoint '" + checkpoint_path + "' does not exist");
        }
        model = trainer::load_model(checkpoint_path);
        stages.push_back({"classifier_inference", [&model, &table](const std::vector<std::string>&) {
                              trainer::predict(model, table);
                          }});
    }

    std::vector<profiler::ProfileResult> results;
    for (const auto& stage : stages) {
        const double sec = profiler::time_stage(stage, recordings, repetitions);
        results.push_back(profiler::extrapolate(stage.name, sec, recordings.size(), budget));
    }
    auto report = profiler::budget_report(results, budget);

    if (!config.output_dir.empty()) {
        const std::string out_dir = ensure_output_dir(config);
        const std::string report_path = (fs::path(out_dir) / "profile_report.json").string();
        std::ofstream out(report_path);
        if (!out) throw IoError("cannot write '" + report_path + "'");
        out << profiler::budget_report_to_json(report) << '\n';
        out.close();
        json echo = config_echo(config);
        echo["checkpoint"] = checkpoint_path;
        echo["repetitions"] = repetitions;
        echo["budget"] = {{"n_test", budget.n_test}, {"budget_minutes", budget.budget_minutes}};
        write_run_manifest("profile", out_dir, echo.dump(), {report_path});
    }
    return report;
}

}  // namespace chirplab::cli
