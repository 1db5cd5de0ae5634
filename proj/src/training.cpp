#include "graphcon/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graphcon {

void ModelConfig::validate() const {
    if (raw_width == 0 || hidden_width == 0 || out_width == 0)
        throw std::invalid_argument("ModelConfig: widths must be positive");
    if (task == Task::Classification && out_width < 2)
        throw std::invalid_argument("ModelConfig: classification requires >= 2 classes");
    if (coupling.feature_width != hidden_width)
        throw std::invalid_argument("ModelConfig: coupling width != hidden width");
    integrator.validate();
}

void TrainConfig::validate() const {
    if (learning_rate < 0.0)
        throw std::invalid_argument("TrainConfig: learning rate must be nonnegative");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
}

std::vector<Matrix*> ModelParams::all() {
    std::vector<Matrix*> ps{&encoder, &readout};
    for (auto& w : coupling.weights) ps.push_back(&w);
    for (auto& a : coupling.attention) ps.push_back(&a);
    return ps;
}

std::vector<const Matrix*> ModelParams::all() const {
    std::vector<const Matrix*> ps{&encoder, &readout};
    for (const auto& w : coupling.weights) ps.push_back(&w);
    for (const auto& a : coupling.attention) ps.push_back(&a);
    return ps;
}

ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ModelParams p;
    Rng rng(seed);
    const double se = 1.0 / std::sqrt(static_cast<double>(cfg.raw_width));
    const double sr = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_width));
    p.encoder = Matrix(cfg.raw_width, cfg.hidden_width);
    for (std::size_t i = 0; i < p.encoder.size(); ++i) p.encoder[i] = rng.uniform(-se, se);
    p.readout = Matrix(cfg.hidden_width, cfg.out_width);
    for (std::size_t i = 0; i < p.readout.size(); ++i) p.readout[i] = rng.uniform(-sr, sr);
    p.coupling = init_params(cfg.coupling, seed + 1);
    return p;
}

ForwardResult forward_model(const ModelConfig& cfg, const ModelParams& params,
                            const Matrix& x_raw, const Graph& g, const NormalizedAdjacency& adj) {
    cfg.validate();
    if (x_raw.cols() != cfg.raw_width)
        throw std::invalid_argument("forward_model: raw feature width mismatch");
    ForwardResult fr;
    fr.tape = std::make_unique<Tape>();
    Tape& tape = *fr.tape;
    fr.encoder_w = tape.leaf(params.encoder);
    fr.readout_w = tape.leaf(params.readout);
    fr.coupling_vars = stage_params(tape, params.coupling);
    Var x0 = tape.matmul(tape.leaf(x_raw), fr.encoder_w);
    if (cfg.use_graphcon) {
        Var y0 = cfg.integrator.y0_mode == Y0Mode::CopyX0
                     ? x0
                     : tape.leaf(Matrix(x0.rows(), x0.cols()));
        fr.trajectory =
            graphcon_forward(tape, x0, y0, cfg.coupling, fr.coupling_vars, g, adj, cfg.integrator);
    } else {
        fr.trajectory = baseline_forward(tape, x0, cfg.coupling, fr.coupling_vars, g, adj,
                                         cfg.integrator);
    }
    fr.predictions = tape.matmul(fr.trajectory.x.back(), fr.readout_w);
    return fr;
}

Optimizer::Optimizer(const TrainConfig& cfg, const std::vector<Matrix*>& params)
    : cfg_(cfg), params_(params) {
    for (Matrix* p : params_) {
        m_.emplace_back(p->rows(), p->cols());
        v_.emplace_back(p->rows(), p->cols());
    }
}

void Optimizer::step(const std::vector<Matrix>& grads) {
    if (grads.size() != params_.size())
        throw std::invalid_argument("Optimizer::step: gradient count mismatch");
    ++t_;
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Matrix& p = *params_[k];
        const Matrix& g = grads[k];
        if (cfg_.optimizer == OptimizerKind::Adam) {
            const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
            for (std::size_t i = 0; i < p.size(); ++i) {
                m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * g[i];
                v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
                const double mhat = m_[k][i] / bc1;
                const double vhat = v_[k][i] / bc2;
                p[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        } else {
            for (std::size_t i = 0; i < p.size(); ++i) {
                m_[k][i] = cfg_.momentum * m_[k][i] + g[i];
                p[i] -= cfg_.learning_rate * m_[k][i];
            }
        }
    }
}

double accuracy(const Matrix& logits, const std::vector<std::uint32_t>& labels,
                const std::vector<std::uint32_t>& rows) {
    if (rows.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::uint32_t r : rows) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c)
            if (logits(r, c) > logits(r, best)) best = c;
        if (best == labels[r]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(rows.size());
}

double mean_abs_error(const Matrix& pred, const Matrix& target,
                      const std::vector<std::uint32_t>& rows) {
    if (rows.empty()) return 0.0;
    double s = 0.0;
    for (std::uint32_t r : rows)
        for (std::size_t c = 0; c < pred.cols(); ++c) s += std::abs(pred(r, c) - target(r, c));
    return s / static_cast<double>(rows.size());
}

TrainResult train(const ModelConfig& mcfg, ModelParams params, const Graph& g,
                  const LabeledData& data, const SplitSpec& splits, const TrainConfig& tcfg) {
    mcfg.validate();
    tcfg.validate();
    if (splits.train.empty()) throw std::invalid_argument("train: empty training split");
    const NormalizedAdjacency adj = normalized_adjacency(g, mcfg.coupling.adjacency);
    Optimizer opt(tcfg, params.all());

    TrainResult result;
    result.best_params = params;
    const bool higher_better = mcfg.task == Task::Classification;
    result.best_val_metric = higher_better ? -1e300 : 1e300;

    for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
        ForwardResult fwd = forward_model(mcfg, params, data.features, g, adj);
        Tape& tape = *fwd.tape;
        Var loss = mcfg.task == Task::Classification
                       ? tape.cross_entropy_loss(fwd.predictions, data.labels, &splits.train)
                       : tape.mse_loss(fwd.predictions, data.targets, &splits.train);
        const double train_loss = loss.value()(0, 0);
        if (!std::isfinite(train_loss))
            throw std::runtime_error("train: nonfinite loss at epoch " + std::to_string(epoch));
        tape.backward(loss);

        std::vector<Matrix> grads;
        grads.push_back(fwd.encoder_w.grad());
        grads.push_back(fwd.readout_w.grad());
        for (const Var& w : fwd.coupling_vars.weights) grads.push_back(w.grad());
        for (const Var& a : fwd.coupling_vars.attention) grads.push_back(a.grad());

        // evaluation on the pre-step parameters
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_loss;
        const Matrix& pred = fwd.predictions.value();
        if (mcfg.task == Task::Classification) {
            Tape eval_tape;
            Var vl = eval_tape.cross_entropy_loss(eval_tape.leaf(pred), data.labels, &splits.val);
            rec.val_loss = vl.value()(0, 0);
            rec.val_metric = accuracy(pred, data.labels, splits.val);
            rec.test_metric = accuracy(pred, data.labels, splits.test);
        } else {
            Tape eval_tape;
            Var vl = eval_tape.mse_loss(eval_tape.leaf(pred), data.targets, &splits.val);
            rec.val_loss = vl.value()(0, 0);
            rec.val_metric = mean_abs_error(pred, data.targets, splits.val);
            rec.test_metric = mean_abs_error(pred, data.targets, splits.test);
        }
        result.history.push_back(rec);

        const bool improved = higher_better ? rec.val_metric > result.best_val_metric
                                            : rec.val_metric < result.best_val_metric;
        if (improved) {
            result.best_val_metric = rec.val_metric;
            result.best_epoch = epoch;
            result.best_params = params;
            result.test_metric = rec.test_metric;
        } else if (epoch - result.best_epoch > tcfg.patience) {
            break;
        }
        opt.step(grads);
    }
    return result;
}

std::vector<double> grad_norm_profile(const ForwardResult& fwd) {
    std::vector<double> norms;
    const std::size_t n_layers = fwd.trajectory.layers();
    for (std::size_t l = 1; l <= n_layers; ++l) {
        double nx = fwd.trajectory.x[l].grad().max_abs();
        if (fwd.trajectory.has_velocity())
            nx = std::max(nx, fwd.trajectory.y[l].grad().max_abs());
        norms.push_back(nx);
    }
    return norms;
}

} // namespace graphcon
