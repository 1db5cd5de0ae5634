#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "graphcon/graph.hpp"
#include "graphcon/matrix.hpp"

namespace graphcon {

enum class Activation { Relu, Tanh, Identity };

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    int idx = -1;

    bool valid() const { return tape != nullptr && idx >= 0; }
    const Matrix& value() const;
    const Matrix& grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
};

// Append-only reverse-mode tape over dense matrices. Nodes are recorded in
// topological order; backward() sweeps them once in reverse. Single writer.
class Tape {
public:
    Var leaf(Matrix value);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double c);
    Var hadamard(Var a, Var b);
    Var concat_cols(Var a, Var b);
    Var slice_rows(Var a, std::size_t row0, std::size_t row1);
    Var activation(Var a, Activation kind);
    Var sum(Var a);  // full reduction to 1x1

    // y_i = sum_{j in N_i u {i}} w_ij x_j. The adjacency must outlive the tape.
    Var spmm(const NormalizedAdjacency* adj, Var x);

    // One score per directed pair of the graph's self-loop layout:
    // s(i,j) = LeakyReLU(a_left . xw_i + a_right . xw_j), target i first.
    Var edge_scores(Var xw, Var att, const Graph* g, double leaky_slope);

    // Softmax over each target node's in-neighborhood (self-loop included),
    // stabilized by per-neighborhood max subtraction.
    Var neighbor_softmax(Var scores, const Graph* g);

    // y_i = sum_{j in N_i u {i}} alpha_ij xw_j
    Var attn_aggregate(Var weights, Var xw, const Graph* g);

    // (1/(2n)) sum over selected rows of |pred - target|^2, n = v or |mask|.
    Var mse_loss(Var pred, const Matrix& target, const std::vector<std::uint32_t>* mask = nullptr);

    // Stabilized softmax cross-entropy averaged over mask (all rows if none).
    Var cross_entropy_loss(Var logits, const std::vector<std::uint32_t>& labels,
                           const std::vector<std::uint32_t>* mask = nullptr);

    // Reverse sweep from a scalar loss. Gradients of every node reachable from
    // the loss are populated; unreachable nodes keep zero gradient.
    void backward(Var loss);

    // Reverse sweep from an arbitrary node with an explicit seed cotangent.
    // Used for Jacobian assembly in the diagnostics suite.
    void backward_seeded(Var node, const Matrix& seed);

    const Matrix& value(int idx) const { return nodes_[idx].value; }
    const Matrix& grad(int idx) const { return nodes_[idx].grad; }
    std::size_t num_nodes() const { return nodes_.size(); }

private:
    enum class Op {
        Leaf, MatMul, Add, Sub, Scale, Hadamard, ConcatCols, SliceRows,
        Activation, Sum, Spmm, EdgeScores, NeighborSoftmax, AttnAggregate,
        MseLoss, CrossEntropy
    };

    struct Node {
        Op op = Op::Leaf;
        int a = -1, b = -1;
        Matrix value;
        Matrix grad;
        double scalar = 0.0;                 // Scale factor / LeakyReLU slope
        Activation act = Activation::Identity;
        std::size_t row0 = 0, row1 = 0;      // SliceRows
        const NormalizedAdjacency* adj = nullptr;
        const Graph* graph = nullptr;
        Matrix aux;                          // EdgeScores pre-activations, loss residuals
        std::vector<std::uint32_t> indices;  // labels / mask rows
    };

    int push(Node n);
    int own(Var v) const;
    void check(bool cond, const char* msg) const;
    void run_backward();

    std::vector<Node> nodes_;
};

} // namespace graphcon
