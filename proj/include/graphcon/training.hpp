#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "graphcon/dynamics.hpp"

namespace graphcon {

enum class Task { Classification, Regression };
enum class OptimizerKind { Adam, SgdMomentum };

struct ModelConfig {
    std::size_t raw_width = 1;    // m_raw
    std::size_t hidden_width = 1; // m
    std::size_t out_width = 1;    // c (classes, or 1 for regression)
    CouplingConfig coupling;
    IntegratorConfig integrator;
    Task task = Task::Classification;
    bool use_graphcon = true;     // false: baseline stacked GNN

    void validate() const;
};

// encoder: m_raw x m, readout: m x c, coupling weights per CouplingConfig.
struct ModelParams {
    Matrix encoder;
    CouplingParams coupling;
    Matrix readout;

    std::vector<Matrix*> all();
    std::vector<const Matrix*> all() const;
};

ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed);

struct ForwardResult {
    std::unique_ptr<Tape> tape;
    Var encoder_w, readout_w;
    CouplingVars coupling_vars;
    Trajectory trajectory;
    Var predictions;  // v x c
};

// readout(X^N) with X^N from graphcon_forward (Y0 per y0_mode applied to the
// encoded features) or baseline_forward.
ForwardResult forward_model(const ModelConfig& cfg, const ModelParams& params,
                            const Matrix& x_raw, const Graph& g, const NormalizedAdjacency& adj);

struct SplitSpec {
    std::vector<std::uint32_t> train, val, test;
};

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::Adam;
    double learning_rate = 0.01;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // Adam
    double momentum = 0.9;                          // SGD
    std::size_t epochs = 100;
    std::size_t patience = 20;  // early stop on validation metric
    std::uint64_t seed = 0;

    void validate() const;
};

// First-moment/second-moment (or velocity) state for a flat parameter list.
class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, const std::vector<Matrix*>& params);
    void step(const std::vector<Matrix>& grads);

private:
    TrainConfig cfg_;
    std::vector<Matrix*> params_;
    std::vector<Matrix> m_, v_;
    std::size_t t_ = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_metric = 0.0;   // accuracy (higher better) or MAE (lower better)
    double test_metric = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    ModelParams best_params;
    std::size_t best_epoch = 0;
    double best_val_metric = 0.0;
    double test_metric = 0.0;  // at the best-validation epoch
};

struct LabeledData {
    Matrix features;                     // v x m_raw
    std::vector<std::uint32_t> labels;   // classification
    Matrix targets;                      // regression, v x 1
};

TrainResult train(const ModelConfig& mcfg, ModelParams params, const Graph& g,
                  const LabeledData& data, const SplitSpec& splits, const TrainConfig& tcfg);

// Per-layer cotangent infinity norms ||dJ/dZ^l||, l = 1..N, after backward.
std::vector<double> grad_norm_profile(const ForwardResult& fwd);

double accuracy(const Matrix& logits, const std::vector<std::uint32_t>& labels,
                const std::vector<std::uint32_t>& rows);
double mean_abs_error(const Matrix& pred, const Matrix& target,
                      const std::vector<std::uint32_t>& rows);

} // namespace graphcon
