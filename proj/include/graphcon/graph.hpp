#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphcon/matrix.hpp"

namespace graphcon {

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

// Undirected graph in CSR form. Each undirected edge {i,j} is stored as the two
// directed pairs (i,j) and (j,i). The base edge set never contains self-loops;
// normalization inserts them (A_hat = A + I).
class Graph {
public:
    static Graph from_edge_list(const EdgeList& pairs, std::uint32_t num_nodes);
    static Graph grid(std::uint32_t width, std::uint32_t height);
    static Graph ring(std::uint32_t num_nodes);

    std::uint32_t num_nodes() const { return num_nodes_; }
    std::uint32_t num_undirected_edges() const {
        return static_cast<std::uint32_t>(col_indices_.size() / 2);
    }
    std::uint32_t num_directed_pairs() const {
        return static_cast<std::uint32_t>(col_indices_.size());
    }

    const std::vector<std::uint32_t>& row_offsets() const { return row_offsets_; }
    const std::vector<std::uint32_t>& col_indices() const { return col_indices_; }

    std::uint32_t degree(std::uint32_t i) const { return row_offsets_[i + 1] - row_offsets_[i]; }

    // d_i = |N_i| (+1 when with_self_loops)
    std::vector<std::uint32_t> degrees(bool with_self_loops) const;

    // Undirected edges listed once, (min,max) order, sorted.
    EdgeList edge_list() const;

    // CSR with self-loops inserted (column i present in row i), sorted per row.
    const std::vector<std::uint32_t>& loop_row_offsets() const { return loop_row_offsets_; }
    const std::vector<std::uint32_t>& loop_col_indices() const { return loop_col_indices_; }
    std::uint32_t num_loop_pairs() const {
        return static_cast<std::uint32_t>(loop_col_indices_.size());
    }

private:
    std::uint32_t num_nodes_ = 0;
    std::vector<std::uint32_t> row_offsets_;   // length v+1
    std::vector<std::uint32_t> col_indices_;   // length 2e
    std::vector<std::uint32_t> loop_row_offsets_;
    std::vector<std::uint32_t> loop_col_indices_;

    void build_loop_layout();
};

enum class AdjacencyKind { SymGCN, RowStochastic };

// Per-directed-pair weights aligned with the graph's self-loop CSR layout.
// SymGCN: w(i,j) = 1/sqrt(dhat_i dhat_j); RowStochastic: w(i,j) = 1/dhat_i,
// with dhat = degree after self-loop insertion.
struct NormalizedAdjacency {
    AdjacencyKind kind = AdjacencyKind::SymGCN;
    std::uint32_t num_nodes = 0;
    std::vector<std::uint32_t> row_offsets;
    std::vector<std::uint32_t> col_indices;
    std::vector<double> weights;

    // y = A x (dense features)
    Matrix apply(const Matrix& x) const;
    Matrix dense() const;
};

NormalizedAdjacency normalized_adjacency(const Graph& g, AdjacencyKind kind);

// E(X) = (1/v) sum_i sum_{j in N_i} ||X_i - X_j||^2 ; every undirected edge
// contributes twice, once per direction.
double dirichlet_energy(const Graph& g, const Matrix& x);

// Edge-list text format: one "src<TAB>dst" per line, 0-based, undirected edges
// listed once, '#' lines ignored.
void write_edge_file(const std::string& path, const Graph& g);
Graph read_edge_file(const std::string& path, std::uint32_t num_nodes_hint = 0);

} // namespace graphcon
