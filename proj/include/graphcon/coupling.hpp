#pragma once

#include <cstdint>
#include <vector>

#include "graphcon/graph.hpp"
#include "graphcon/rng.hpp"
#include "graphcon/tape.hpp"

namespace graphcon {

enum class CouplingKind { GCN, GAT };

struct CouplingConfig {
    CouplingKind kind = CouplingKind::GCN;
    std::size_t feature_width = 1;     // m
    std::size_t num_layers = 1;        // N
    bool share_weights = false;
    double leaky_slope = 0.2;                          // GAT only
    AdjacencyKind adjacency = AdjacencyKind::SymGCN;   // GCN only
};

// Per-layer (or shared) weight matrix W: m x m; GAT adds attention vector a: 2m x 1.
struct CouplingParams {
    std::vector<Matrix> weights;
    std::vector<Matrix> attention;

    std::size_t num_sets() const { return weights.size(); }
};

// W entries uniform in [-1/sqrt(m), 1/sqrt(m)]; a in [-1/sqrt(2m), 1/sqrt(2m)].
CouplingParams init_params(const CouplingConfig& cfg, std::uint64_t seed);

// The learnable 1-neighborhood coupling F_theta applied to one layer's state.
// GCN: spmm(adj, X W). GAT: attention-weighted aggregation of X W.
// Fully differentiable through the tape. Leaf handles onto the tape for the
// layer's parameters are created by the caller via CouplingVars.
struct CouplingVars {
    std::vector<Var> weights;
    std::vector<Var> attention;
};

// Places every parameter set onto the tape as leaves (call once per tape).
CouplingVars stage_params(Tape& tape, const CouplingParams& params);

Var apply_coupling(Tape& tape, const CouplingConfig& cfg, const CouplingVars& vars,
                   Var x, const Graph& g, const NormalizedAdjacency& adj, std::size_t layer);

} // namespace graphcon
