#ifndef CHIRPLAB_CLI_HPP
#define CHIRPLAB_CLI_HPP

#include <optional>
#include <string>
#include <vector>

#include "chirplab/cooccur.hpp"
#include "chirplab/metrics.hpp"
#include "chirplab/profiler.hpp"
#include "chirplab/pseudolabel.hpp"
#include "chirplab/trainer.hpp"

namespace chirplab::cli {

struct MiningConfig {
    std::size_t min_support = 1;
    // when set, overrides min_support with ceil(fraction * n_transactions)
    std::optional<double> min_support_fraction;
    double min_confidence = 0.8;
    bool per_interval = false;
    // "transactions" (default) or "itemsets": which size distribution to export
    std::string histogram_kind = "transactions";
};

/// One config file drives every subcommand; each command reads the slice it
/// needs and validates the paths it actually touches.
struct PipelineConfig {
    std::string embedding_table;        // data CSV
    std::string manifest;               // table manifest JSON
    std::string vocabulary;             // optional override of the manifest's
    std::string folder_species_map;     // CSV, needed for augmentation
    std::string output_dir;

    pseudolabel::PseudoLabelConfig pseudo;
    trainer::TrainConfig train;
    MiningConfig mining;
    double evaluation_threshold = 0.5;
};

PipelineConfig load_pipeline_config(const std::string& path);

/// Thresholds the table into a label matrix CSV plus a summary JSON.
/// Returns the label matrix path.
std::string cmd_pseudolabel(const PipelineConfig& config);

/// Trains on the table against a label matrix; writes checkpoint JSON,
/// per-epoch history CSV, and the validation EvalReport JSON.
struct TrainOutputs {
    std::string checkpoint_path;
    std::string history_path;
    std::string report_path;
};
TrainOutputs cmd_train(const PipelineConfig& config, const std::string& labels_path);

/// Competition-style prediction CSV: row_id = {recording_id}_{interval_end_sec}.
std::string cmd_predict(const PipelineConfig& config, const std::string& checkpoint_path,
                        const std::string& out_path = "");

/// Evaluates a prediction CSV against a label matrix CSV (aligned row ids).
metrics::EvalReport cmd_evaluate(const std::string& predictions_path,
                                 const std::string& labels_path,
                                 double decision_threshold,
                                 const std::string& report_out = "");

struct MineOutputs {
    std::string itemsets_path;
    std::string rules_path;
    std::string histogram_path;
    std::string rule_graph_path;
};
MineOutputs cmd_mine(const PipelineConfig& config, const std::string& labels_path);

/// Times the built-in pipeline stages (table load, pseudo-labeling, and
/// classifier inference when a checkpoint is given) and extrapolates.
profiler::BudgetReport cmd_profile(const PipelineConfig& config,
                                   const std::string& checkpoint_path,
                                   std::size_t repetitions,
                                   const profiler::BudgetSpec& budget);

/// Every command appends a run manifest (config echo, seed, artifact hashes)
/// next to its outputs; no timestamps, so identical runs are byte-identical.
void write_run_manifest(const std::string& command, const std::string& output_dir,
                        const std::string& config_echo_json,
                        const std::vector<std::string>& artifact_paths);

}  // namespace chirplab::cli

#endif
