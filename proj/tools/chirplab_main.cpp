#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chirplab/cli.hpp"
#include "chirplab/common.hpp"

namespace {

using chirplab::cli::PipelineConfig;

int run(int argc, char** argv) {
    CLI::App app{"Birdcall transfer-learning toolkit: pseudo-labels, classifier heads, "
                 "co-occurrence mining, and inference budgeting over embedding tables"};
    app.require_subcommand(1);

    std::string config_path;
    std::string labels_path;
    std::string checkpoint_path;
    std::string predictions_path;
    std::string out_path;
    double threshold = -1.0;  // sentinel: keep config value
    std::int64_t seed = -1;
    std::int64_t min_support = -1;
    double min_support_frac = -1.0;
    double min_confidence = -1.0;
    bool per_interval = false;
    std::string histogram_kind;
    std::size_t repetitions = 3;
    double budget_minutes = 120.0;
    std::size_t n_test = 1100;

    auto* cmd_pl = app.add_subcommand("pseudolabel", "Threshold surrogate logits into a label matrix");
    cmd_pl->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd_pl->add_option("--threshold", threshold, "detection probability threshold");

    auto* cmd_tr = app.add_subcommand("train", "Train a classifier head on embeddings");
    cmd_tr->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd_tr->add_option("--labels", labels_path, "label matrix CSV (default: <output_dir>/labels.csv)");
    cmd_tr->add_option("--seed", seed, "override train.seed");

    auto* cmd_pr = app.add_subcommand("predict", "Write competition-style prediction CSV");
    cmd_pr->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd_pr->add_option("--checkpoint", checkpoint_path, "model checkpoint JSON")->required();
    cmd_pr->add_option("--out", out_path, "output CSV (default: <output_dir>/predictions.csv)");

    auto* cmd_ev = app.add_subcommand("evaluate", "Score a prediction CSV against a label matrix");
    cmd_ev->add_option("--predictions", predictions_path, "prediction CSV")->required();
    cmd_ev->add_option("--labels", labels_path, "label matrix CSV")->required();
    cmd_ev->add_option("--threshold", threshold, "decision threshold for F1 (default 0.5)");
    cmd_ev->add_option("--out", out_path, "also write the report JSON here");

    auto* cmd_mi = app.add_subcommand("mine", "Mine frequent itemsets and association rules");
    cmd_mi->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd_mi->add_option("--labels", labels_path, "label matrix CSV (default: <output_dir>/labels.csv)");
    cmd_mi->add_option("--min-support", min_support, "absolute support threshold");
    cmd_mi->add_option("--min-support-frac", min_support_frac,
                       "fractional support threshold, converted via ceiling");
    cmd_mi->add_option("--min-confidence", min_confidence, "rule confidence threshold");
    cmd_mi->add_flag("--per-interval", per_interval, "per-interval baskets instead of per-recording");
    cmd_mi->add_option("--histogram-kind", histogram_kind, "'transactions' or 'itemsets'");

    auto* cmd_pf = app.add_subcommand("profile", "Time pipeline stages and extrapolate to a budget");
    cmd_pf->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd_pf->add_option("--checkpoint", checkpoint_path, "optional checkpoint for the inference stage");
    cmd_pf->add_option("--repetitions", repetitions, "timing repetitions (median is reported)");
    cmd_pf->add_option("--budget-minutes", budget_minutes, "time budget in minutes");
    cmd_pf->add_option("--n-test", n_test, "hidden-test recording count");

    CLI11_PARSE(app, argc, argv);

    auto load_config = [&]() {
        PipelineConfig config = chirplab::cli::load_pipeline_config(config_path);
        if (threshold >= 0.0) config.pseudo.p_threshold = threshold;
        if (seed >= 0) config.train.seed = static_cast<std::uint64_t>(seed);
        if (min_support >= 0) config.mining.min_support = static_cast<std::size_t>(min_support);
        if (min_support_frac >= 0.0) config.mining.min_support_fraction = min_support_frac;
        if (min_confidence >= 0.0) config.mining.min_confidence = min_confidence;
        if (per_interval) config.mining.per_interval = true;
        if (!histogram_kind.empty()) config.mining.histogram_kind = histogram_kind;
        return config;
    };

    if (cmd_pl->parsed()) {
        auto config = load_config();
        const std::string path = chirplab::cli::cmd_pseudolabel(config);
        std::cout << "wrote " << path << "\n";
    } else if (cmd_tr->parsed()) {
        auto config = load_config();
        if (labels_path.empty()) {
            labels_path = config.output_dir + "/labels.csv";
        }
        const auto outputs = chirplab::cli::cmd_train(config, labels_path);
        std::cout << "wrote " << outputs.checkpoint_path << "\n"
                  << "wrote " << outputs.history_path << "\n"
                  << "wrote " << outputs.report_path << "\n";
    } else if (cmd_pr->parsed()) {
        auto config = load_config();
        const std::string path = chirplab::cli::cmd_predict(config, checkpoint_path, out_path);
        std::cout << "wrote " << path << "\n";
    } else if (cmd_ev->parsed()) {
        const double t = threshold >= 0.0 ? threshold : 0.5;
        const auto report = chirplab::cli::cmd_evaluate(predictions_path, labels_path, t, out_path);
        std::cout << chirplab::metrics::report_to_text(report);
    } else if (cmd_mi->parsed()) {
        auto config = load_config();
        if (labels_path.empty()) {
            labels_path = config.output_dir + "/labels.csv";
        }
        const auto outputs = chirplab::cli::cmd_mine(config, labels_path);
        std::cout << "wrote " << outputs.itemsets_path << "\n"
                  << "wrote " << outputs.rules_path << "\n"
                  << "wrote " << outputs.histogram_path << "\n"
                  << "wrote " << outputs.rule_graph_path << "\n";
    } else if (cmd_pf->parsed()) {
        auto config = load_config();
        chirplab::profiler::BudgetSpec budget;
        budget.budget_minutes = budget_minutes;
        budget.n_test = n_test;
        const auto report = chirplab::cli::cmd_profile(config, checkpoint_path, repetitions, budget);
        std::cout << chirplab::profiler::budget_report_to_text(report);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const chirplab::ConfigError& e) {
        std::cerr << "error:config: " << e.what() << "\n";
        return 2;
    } catch (const chirplab::IoError& e) {
        std::cerr << "error:io: " << e.what() << "\n";
        return 3;
    } catch (const chirplab::ValidationError& e) {
        std::cerr << "error:validation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error:internal: " << e.what() << "\n";
        return 5;
    }
}
