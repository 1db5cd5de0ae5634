#include "graphcon/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace graphcon {

Graph Graph::from_edge_list(const EdgeList& pairs, std::uint32_t num_nodes) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> directed;
    for (const auto& [a, b] : pairs) {
        if (a >= num_nodes || b >= num_nodes)
            throw std::invalid_argument("from_edge_list: node index " +
                                        std::to_string(std::max(a, b)) + " out of range (v=" +
                                        std::to_string(num_nodes) + ")");
        if (a == b)
            throw std::invalid_argument("from_edge_list: self-loop on node " + std::to_string(a) +
                                        " not allowed in the base edge set");
        directed.emplace(a, b);
        directed.emplace(b, a);
    }
    Graph g;
    g.num_nodes_ = num_nodes;
    g.row_offsets_.assign(num_nodes + 1, 0);
    for (const auto& [a, b] : directed) g.row_offsets_[a + 1]++;
    for (std::uint32_t i = 0; i < num_nodes; ++i) g.row_offsets_[i + 1] += g.row_offsets_[i];
    g.col_indices_.reserve(directed.size());
    for (const auto& [a, b] : directed) g.col_indices_.push_back(b);  // set order = sorted
    g.build_loop_layout();
    return g;
}

Graph Graph::grid(std::uint32_t width, std::uint32_t height) {
    if (width == 0 || height == 0)
        throw std::invalid_argument("grid: dimensions must be positive");
    EdgeList edges;
    for (std::uint32_t r = 0; r < height; ++r)
        for (std::uint32_t c = 0; c < width; ++c) {
            const std::uint32_t i = r * width + c;
            if (c + 1 < width) edges.emplace_back(i, i + 1);
            if (r + 1 < height) edges.emplace_back(i, i + width);
        }
    return from_edge_list(edges, width * height);
}

Graph Graph::ring(std::uint32_t num_nodes) {
    if (num_nodes < 3) throw std::invalid_argument("ring: need at least 3 nodes");
    EdgeList edges;
    for (std::uint32_t i = 0; i < num_nodes; ++i) edges.emplace_back(i, (i + 1) % num_nodes);
    return from_edge_list(edges, num_nodes);
}

std::vector<std::uint32_t> Graph::degrees(bool with_self_loops) const {
    std::vector<std::uint32_t> d(num_nodes_);
    for (std::uint32_t i = 0; i < num_nodes_; ++i)
        d[i] = degree(i) + (with_self_loops ? 1u : 0u);
    return d;
}

EdgeList Graph::edge_list() const {
    EdgeList out;
    for (std::uint32_t i = 0; i < num_nodes_; ++i)
        for (std::uint32_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            if (i < col_indices_[k]) out.emplace_back(i, col_indices_[k]);
    return out;
}

void Graph::build_loop_layout() {
    loop_row_offsets_.assign(num_nodes_ + 1, 0);
    loop_col_indices_.clear();
    loop_col_indices_.reserve(col_indices_.size() + num_nodes_);
    for (std::uint32_t i = 0; i < num_nodes_; ++i) {
        bool inserted = false;
        for (std::uint32_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            if (!inserted && col_indices_[k] > i) {
                loop_col_indices_.push_back(i);
                inserted = true;
            }
            loop_col_indices_.push_back(col_indices_[k]);
        }
        if (!inserted) loop_col_indices_.push_back(i);
        loop_row_offsets_[i + 1] = static_cast<std::uint32_t>(loop_col_indices_.size());
    }
}

NormalizedAdjacency normalized_adjacency(const Graph& g, AdjacencyKind kind) {
    NormalizedAdjacency adj;
    adj.kind = kind;
    adj.num_nodes = g.num_nodes();
    adj.row_offsets = g.loop_row_offsets();
    adj.col_indices = g.loop_col_indices();
    adj.weights.resize(adj.col_indices.size());
    const auto dhat = g.degrees(true);
    for (std::uint32_t i = 0; i < adj.num_nodes; ++i)
        for (std::uint32_t k = adj.row_offsets[i]; k < adj.row_offsets[i + 1]; ++k) {
            const std::uint32_t j = adj.col_indices[k];
            adj.weights[k] = (kind == AdjacencyKind::SymGCN)
                                 ? 1.0 / std::sqrt(static_cast<double>(dhat[i]) * dhat[j])
                                 : 1.0 / static_cast<double>(dhat[i]);
        }
    return adj;
}

Matrix NormalizedAdjacency::apply(const Matrix& x) const {
    if (x.rows() != num_nodes)
        throw std::invalid_argument("adjacency apply: feature rows " + std::to_string(x.rows()) +
                                    " != nodes " + std::to_string(num_nodes));
    Matrix y(x.rows(), x.cols());
    for (std::uint32_t i = 0; i < num_nodes; ++i)
        for (std::uint32_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
            const std::uint32_t j = col_indices[k];
            const double w = weights[k];
            for (std::size_t c = 0; c < x.cols(); ++c) y(i, c) += w * x(j, c);
        }
    return y;
}

Matrix NormalizedAdjacency::dense() const {
    Matrix a(num_nodes, num_nodes);
    for (std::uint32_t i = 0; i < num_nodes; ++i)
        for (std::uint32_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
            a(i, col_indices[k]) = weights[k];
    return a;
}

double dirichlet_energy(const Graph& g, const Matrix& x) {
    if (x.rows() != g.num_nodes())
        throw std::invalid_argument("dirichlet_energy: feature rows " + std::to_string(x.rows()) +
                                    " != nodes " + std::to_string(g.num_nodes()));
    double sum = 0.0;
    const auto& offs = g.row_offsets();
    const auto& cols = g.col_indices();
    for (std::uint32_t i = 0; i < g.num_nodes(); ++i)
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) {
            const std::uint32_t j = cols[k];
            for (std::size_t c = 0; c < x.cols(); ++c) {
                const double d = x(i, c) - x(j, c);
                sum += d * d;
            }
        }
    return sum / static_cast<double>(g.num_nodes());
}

void write_edge_file(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "# graphcon edge list, v=" << g.num_nodes() << "\n";
    for (const auto& [a, b] : g.edge_list()) out << a << '\t' << b << '\n';
}

Graph read_edge_file(const std::string& path, std::uint32_t num_nodes_hint) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    EdgeList edges;
    std::uint32_t max_id = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        long long a = -1, b = -1;
        if (!(ss >> a >> b) || a < 0 || b < 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed edge line");
        edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
        max_id = std::max({max_id, static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
    }
    const std::uint32_t v = std::max(num_nodes_hint, edges.empty() ? 0 : max_id + 1);
    return Graph::from_edge_list(edges, v);
}

} // namespace graphcon
