#include "graphcon/coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace graphcon {

CouplingParams init_params(const CouplingConfig& cfg, std::uint64_t seed) {
    if (cfg.feature_width == 0) throw std::invalid_argument("init_params: feature width must be >= 1");
    Rng rng(seed);
    const std::size_t sets = cfg.share_weights ? 1 : cfg.num_layers;
    const double sw = 1.0 / std::sqrt(static_cast<double>(cfg.feature_width));
    const double sa = 1.0 / std::sqrt(2.0 * static_cast<double>(cfg.feature_width));
    CouplingParams p;
    for (std::size_t s = 0; s < sets; ++s) {
        Matrix w(cfg.feature_width, cfg.feature_width);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-sw, sw);
        p.weights.push_back(std::move(w));
        if (cfg.kind == CouplingKind::GAT) {
            Matrix a(2 * cfg.feature_width, 1);
            for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(-sa, sa);
            p.attention.push_back(std::move(a));
        }
    }
    return p;
}

CouplingVars stage_params(Tape& tape, const CouplingParams& params) {
    CouplingVars v;
    for (const auto& w : params.weights) v.weights.push_back(tape.leaf(w));
    for (const auto& a : params.attention) v.attention.push_back(tape.leaf(a));
    return v;
}

Var apply_coupling(Tape& tape, const CouplingConfig& cfg, const CouplingVars& vars,
                   Var x, const Graph& g, const NormalizedAdjacency& adj, std::size_t layer) {
    const std::size_t set = cfg.share_weights ? 0 : layer;
    if (set >= vars.weights.size())
        throw std::invalid_argument("apply_coupling: layer index " + std::to_string(layer) +
                                    " out of range for " + std::to_string(vars.weights.size()) +
                                    " parameter sets");
    Var xw = tape.matmul(x, vars.weights[set]);
    if (cfg.kind == CouplingKind::GCN) return tape.spmm(&adj, xw);
    Var scores = tape.edge_scores(xw, vars.attention[set], &g, cfg.leaky_slope);
    Var alphas = tape.neighbor_softmax(scores, &g);
    return tape.attn_aggregate(alphas, xw, &g);
}

} // namespace graphcon
