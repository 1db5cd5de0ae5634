#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphcon/graph.hpp"
#include "graphcon/training.hpp"

namespace graphcon {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double x);

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };
LogLevel log_level();  // from GRAPHCON_LOG in {error, info, debug}
void log_line(LogLevel lvl, const std::string& msg);

struct Dataset {
    Graph graph;
    Matrix features;                      // v x m_raw
    std::vector<std::uint32_t> labels;    // empty when regression / unlabeled
    Matrix targets;                       // v x 1 when regression
    std::optional<SplitSpec> splits;
    std::vector<std::uint64_t> id_map;    // dense index -> original node id
    std::size_t num_classes = 0;
};

// Files: edges as "src<TAB>dst" lines ('#' comments); features as headerless
// comma-separated doubles, one node per line; labels one integer per line;
// splits as JSON {"train": [...], "val": [...], "test": [...]}.
Dataset load_dataset(const std::string& edge_path, const std::string& feature_path,
                     const std::optional<std::string>& label_path = std::nullopt,
                     const std::optional<std::string>& split_path = std::nullopt);

void save_dataset(const std::string& dir, const Dataset& ds);

// Two-block stochastic model: community c_i = floor(i C / v); features are the
// one-hot community mean plus N(0, 0.5^2) noise. Deterministic in seed.
Dataset gen_sbm(std::uint32_t num_nodes, std::uint32_t num_communities, double p_in, double p_out,
                std::uint64_t seed);

SplitSpec make_splits(std::uint32_t num_nodes, std::uint64_t seed, double train_frac = 0.6,
                      double val_frac = 0.2);

// Parameter checkpoints: JSON arrays with shape headers; round-trips bit-exact.
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

void write_trajectory_csv(const std::string& path, const std::vector<Matrix>& xs,
                          const std::vector<Matrix>& ys);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(const std::string& path) const;
};

// ---------------------------------------------------------------------------
// Experiment configuration (JSON). Unknown keys are rejected by name.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::uint64_t seed = 0;
    // dataset: either file paths or a synthetic block
    std::optional<std::string> edge_path, feature_path, label_path, split_path;
    bool synthetic = true;
    std::uint32_t sbm_nodes = 200;
    std::uint32_t sbm_communities = 2;
    double sbm_p_in = 0.10, sbm_p_out = 0.01;

    ModelConfig model;
    TrainConfig train;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig default_experiment_config();

Dataset materialize_dataset(const ExperimentConfig& cfg);

} // namespace graphcon
