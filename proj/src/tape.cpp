#include "graphcon/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graphcon {

const Matrix& Var::value() const { return tape->value(idx); }
const Matrix& Var::grad() const { return tape->grad(idx); }

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check(bool cond, const char* msg) const {
    if (!cond) throw std::invalid_argument(msg);
}

int Tape::own(Var v) const {
    check(v.tape == this && v.idx >= 0 && v.idx < static_cast<int>(nodes_.size()),
          "tape: operand belongs to a different tape");
    return v.idx;
}

Var Tape::leaf(Matrix value) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    return {this, push(std::move(n))};
}

Var Tape::matmul(Var a, Var b) {
    check(a.value().cols() == b.value().rows(), "matmul: inner dimensions differ");
    Node n;
    n.op = Op::MatMul;
    n.a = own(a);
    n.b = own(b);
    n.value = graphcon::matmul(a.value(), b.value());
    return {this, push(std::move(n))};
}

Var Tape::add(Var a, Var b) {
    check(a.value().same_shape(b.value()), "add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.a = own(a);
    n.b = own(b);
    n.value = a.value() + b.value();
    return {this, push(std::move(n))};
}

Var Tape::sub(Var a, Var b) {
    check(a.value().same_shape(b.value()), "sub: shape mismatch");
    Node n;
    n.op = Op::Sub;
    n.a = own(a);
    n.b = own(b);
    n.value = a.value() - b.value();
    return {this, push(std::move(n))};
}

Var Tape::scale(Var a, double c) {
    Node n;
    n.op = Op::Scale;
    n.a = own(a);
    n.scalar = c;
    n.value = c * a.value();
    return {this, push(std::move(n))};
}

Var Tape::hadamard(Var a, Var b) {
    check(a.value().same_shape(b.value()), "hadamard: shape mismatch");
    Node n;
    n.op = Op::Hadamard;
    n.a = own(a);
    n.b = own(b);
    n.value = a.value();
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= b.value()[i];
    return {this, push(std::move(n))};
}

Var Tape::concat_cols(Var a, Var b) {
    check(a.value().rows() == b.value().rows(), "concat_cols: row mismatch");
    const auto& va = a.value();
    const auto& vb = b.value();
    Node n;
    n.op = Op::ConcatCols;
    n.a = own(a);
    n.b = own(b);
    n.value = Matrix(va.rows(), va.cols() + vb.cols());
    for (std::size_t r = 0; r < va.rows(); ++r) {
        for (std::size_t c = 0; c < va.cols(); ++c) n.value(r, c) = va(r, c);
        for (std::size_t c = 0; c < vb.cols(); ++c) n.value(r, va.cols() + c) = vb(r, c);
    }
    return {this, push(std::move(n))};
}

Var Tape::slice_rows(Var a, std::size_t row0, std::size_t row1) {
    check(row0 < row1 && row1 <= a.value().rows(), "slice_rows: bad range");
    const auto& va = a.value();
    Node n;
    n.op = Op::SliceRows;
    n.a = own(a);
    n.row0 = row0;
    n.row1 = row1;
    n.value = Matrix(row1 - row0, va.cols());
    for (std::size_t r = row0; r < row1; ++r)
        for (std::size_t c = 0; c < va.cols(); ++c) n.value(r - row0, c) = va(r, c);
    return {this, push(std::move(n))};
}

Var Tape::activation(Var a, Activation kind) {
    Node n;
    n.op = Op::Activation;
    n.a = own(a);
    n.act = kind;
    n.value = a.value();
    switch (kind) {
        case Activation::Relu:
            for (std::size_t i = 0; i < n.value.size(); ++i)
                if (n.value[i] < 0.0) n.value[i] = 0.0;
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = std::tanh(n.value[i]);
            break;
        case Activation::Identity:
            break;
    }
    return {this, push(std::move(n))};
}

Var Tape::sum(Var a) {
    Node n;
    n.op = Op::Sum;
    n.a = own(a);
    n.value = Matrix(1, 1);
    for (std::size_t i = 0; i < a.value().size(); ++i) n.value[0] += a.value()[i];
    return {this, push(std::move(n))};
}

Var Tape::spmm(const NormalizedAdjacency* adj, Var x) {
    check(adj != nullptr, "spmm: null adjacency");
    Node n;
    n.op = Op::Spmm;
    n.a = own(x);
    n.adj = adj;
    n.value = adj->apply(x.value());
    return {this, push(std::move(n))};
}

Var Tape::edge_scores(Var xw, Var att, const Graph* g, double leaky_slope) {
    const auto& x = xw.value();
    const auto& a = att.value();
    const std::size_t m = x.cols();
    check(g != nullptr && x.rows() == g->num_nodes(), "edge_scores: feature rows != nodes");
    check(a.rows() == 2 * m && a.cols() == 1, "edge_scores: attention vector must be 2m x 1");
    const auto& offs = g->loop_row_offsets();
    const auto& cols = g->loop_col_indices();
    Node n;
    n.op = Op::EdgeScores;
    n.a = own(xw);
    n.b = own(att);
    n.graph = g;
    n.scalar = leaky_slope;
    n.aux = Matrix(cols.size(), 1);  // pre-activations
    n.value = Matrix(cols.size(), 1);
    for (std::uint32_t i = 0; i < g->num_nodes(); ++i)
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) {
            const std::uint32_t j = cols[k];
            double s = 0.0;
            for (std::size_t f = 0; f < m; ++f) s += a(f, 0) * x(i, f) + a(m + f, 0) * x(j, f);
            n.aux(k, 0) = s;
            n.value(k, 0) = s > 0.0 ? s : leaky_slope * s;
        }
    return {this, push(std::move(n))};
}

Var Tape::neighbor_softmax(Var scores, const Graph* g) {
    check(g != nullptr, "neighbor_softmax: null graph");
    const auto& s = scores.value();
    check(s.rows() == g->num_loop_pairs() && s.cols() == 1,
          "neighbor_softmax: one score per directed pair expected");
    const auto& offs = g->loop_row_offsets();
    Node n;
    n.op = Op::NeighborSoftmax;
    n.a = own(scores);
    n.graph = g;
    n.value = Matrix(s.rows(), 1);
    for (std::uint32_t i = 0; i < g->num_nodes(); ++i) {
        double mx = -1e300;
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) mx = std::max(mx, s(k, 0));
        double z = 0.0;
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) {
            n.value(k, 0) = std::exp(s(k, 0) - mx);
            z += n.value(k, 0);
        }
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) n.value(k, 0) /= z;
    }
    return {this, push(std::move(n))};
}

Var Tape::attn_aggregate(Var weights, Var xw, const Graph* g) {
    check(g != nullptr, "attn_aggregate: null graph");
    const auto& w = weights.value();
    const auto& x = xw.value();
    check(w.rows() == g->num_loop_pairs() && w.cols() == 1,
          "attn_aggregate: one weight per directed pair expected");
    check(x.rows() == g->num_nodes(), "attn_aggregate: feature rows != nodes");
    const auto& offs = g->loop_row_offsets();
    const auto& cols = g->loop_col_indices();
    Node n;
    n.op = Op::AttnAggregate;
    n.a = own(weights);
    n.b = own(xw);
    n.graph = g;
    n.value = Matrix(x.rows(), x.cols());
    for (std::uint32_t i = 0; i < g->num_nodes(); ++i)
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) {
            const std::uint32_t j = cols[k];
            for (std::size_t c = 0; c < x.cols(); ++c) n.value(i, c) += w(k, 0) * x(j, c);
        }
    return {this, push(std::move(n))};
}

Var Tape::mse_loss(Var pred, const Matrix& target, const std::vector<std::uint32_t>* mask) {
    const auto& p = pred.value();
    check(p.same_shape(target), "mse_loss: prediction/target shape mismatch");
    check(mask == nullptr || !mask->empty(), "mse_loss: empty mask");
    Node n;
    n.op = Op::MseLoss;
    n.a = own(pred);
    if (mask) n.indices = *mask;
    n.aux = p - target;  // residual
    const double denom = mask ? static_cast<double>(mask->size()) : static_cast<double>(p.rows());
    n.scalar = denom;
    double s = 0.0;
    if (mask) {
        for (std::uint32_t r : *mask)
            for (std::size_t c = 0; c < p.cols(); ++c) s += n.aux(r, c) * n.aux(r, c);
    } else {
        for (std::size_t i = 0; i < n.aux.size(); ++i) s += n.aux[i] * n.aux[i];
    }
    n.value = Matrix(1, 1);
    n.value[0] = s / (2.0 * denom);
    return {this, push(std::move(n))};
}

Var Tape::cross_entropy_loss(Var logits, const std::vector<std::uint32_t>& labels,
                             const std::vector<std::uint32_t>* mask) {
    const auto& z = logits.value();
    check(labels.size() == z.rows(), "cross_entropy: one label per row expected");
    check(mask == nullptr || !mask->empty(), "cross_entropy: empty mask");
    for (std::uint32_t lab : labels)
        check(lab < z.cols(), "cross_entropy: label >= number of classes");
    Node n;
    n.op = Op::CrossEntropy;
    n.a = own(logits);
    n.indices = labels;
    std::vector<std::uint32_t> rows;
    if (mask) rows = *mask;
    else {
        rows.resize(z.rows());
        for (std::size_t r = 0; r < z.rows(); ++r) rows[r] = static_cast<std::uint32_t>(r);
    }
    n.aux = Matrix(z.rows(), z.cols());  // softmax rows, filled for masked rows only
    const double denom = static_cast<double>(rows.size());
    n.scalar = denom;
    double loss = 0.0;
    for (std::uint32_t r : rows) {
        double mx = z(r, 0);
        for (std::size_t c = 1; c < z.cols(); ++c) mx = std::max(mx, z(r, c));
        double lse = 0.0;
        for (std::size_t c = 0; c < z.cols(); ++c) lse += std::exp(z(r, c) - mx);
        lse = mx + std::log(lse);
        loss += lse - z(r, labels[r]);
        for (std::size_t c = 0; c < z.cols(); ++c) n.aux(r, c) = std::exp(z(r, c) - lse);
    }
    // stash the masked rows after the labels
    n.indices.push_back(static_cast<std::uint32_t>(z.rows()));  // separator sentinel
    n.indices.insert(n.indices.end(), rows.begin(), rows.end());
    n.value = Matrix(1, 1);
    n.value[0] = loss / denom;
    return {this, push(std::move(n))};
}

void Tape::backward(Var loss) {
    check(loss.tape == this, "backward: loss from another tape");
    const auto& v = loss.value();
    check(v.rows() == 1 && v.cols() == 1, "backward: loss must be scalar (1x1)");
    Matrix seed(1, 1);
    seed[0] = 1.0;
    backward_seeded(loss, seed);
}

void Tape::backward_seeded(Var node, const Matrix& seed) {
    check(node.tape == this, "backward_seeded: node from another tape");
    check(seed.same_shape(node.value()), "backward_seeded: seed shape mismatch");
    for (auto& n : nodes_) n.grad = Matrix(n.value.rows(), n.value.cols());
    nodes_[node.idx].grad = seed;
    run_backward();
}

void Tape::run_backward() {
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        Node& n = nodes_[i];
        const Matrix& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::MatMul: {
                const Matrix& av = nodes_[n.a].value;
                const Matrix& bv = nodes_[n.b].value;
                Matrix& ag = nodes_[n.a].grad;
                Matrix& bg = nodes_[n.b].grad;
                // a_bar += g b^T ; b_bar += a^T g
                for (std::size_t r = 0; r < av.rows(); ++r)
                    for (std::size_t c = 0; c < av.cols(); ++c) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < bv.cols(); ++j) s += g(r, j) * bv(c, j);
                        ag(r, c) += s;
                    }
                for (std::size_t r = 0; r < bv.rows(); ++r)
                    for (std::size_t c = 0; c < bv.cols(); ++c) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < av.rows(); ++j) s += av(j, r) * g(j, c);
                        bg(r, c) += s;
                    }
                break;
            }
            case Op::Add: {
                Matrix& ag = nodes_[n.a].grad;
                Matrix& bg = nodes_[n.b].grad;
                for (std::size_t k = 0; k < g.size(); ++k) {
                    ag[k] += g[k];
                    bg[k] += g[k];
                }
                break;
            }
            case Op::Sub: {
                Matrix& ag = nodes_[n.a].grad;
                Matrix& bg = nodes_[n.b].grad;
                for (std::size_t k = 0; k < g.size(); ++k) {
                    ag[k] += g[k];
                    bg[k] -= g[k];
                }
                break;
            }
            case Op::Scale: {
                Matrix& ag = nodes_[n.a].grad;
                for (std::size_t k = 0; k < g.size(); ++k) ag[k] += n.scalar * g[k];
                break;
            }
            case Op::Hadamard: {
                const Matrix& av = nodes_[n.a].value;
                const Matrix& bv = nodes_[n.b].value;
                Matrix& ag = nodes_[n.a].grad;
                Matrix& bg = nodes_[n.b].grad;
                for (std::size_t k = 0; k < g.size(); ++k) {
                    ag[k] += g[k] * bv[k];
                    bg[k] += g[k] * av[k];
                }
                break;
            }
            case Op::ConcatCols: {
                const Matrix& av = nodes_[n.a].value;
                const Matrix& bv = nodes_[n.b].value;
                Matrix& ag = nodes_[n.a].grad;
                Matrix& bg = nodes_[n.b].grad;
                for (std::size_t r = 0; r < av.rows(); ++r) {
                    for (std::size_t c = 0; c < av.cols(); ++c) ag(r, c) += g(r, c);
                    for (std::size_t c = 0; c < bv.cols(); ++c) bg(r, c) += g(r, av.cols() + c);
                }
                break;
            }
            case Op::SliceRows: {
                Matrix& ag = nodes_[n.a].grad;
                for (std::size_t r = n.row0; r < n.row1; ++r)
                    for (std::size_t c = 0; c < ag.cols(); ++c) ag(r, c) += g(r - n.row0, c);
                break;
            }
            case Op::Activation: {
                const Matrix& av = nodes_[n.a].value;
                Matrix& ag = nodes_[n.a].grad;
                switch (n.act) {
                    case Activation::Relu:
                        // subgradient at exactly 0 is 0
                        for (std::size_t k = 0; k < g.size(); ++k)
                            if (av[k] > 0.0) ag[k] += g[k];
                        break;
                    case Activation::Tanh:
                        for (std::size_t k = 0; k < g.size(); ++k)
                            ag[k] += g[k] * (1.0 - n.value[k] * n.value[k]);
                        break;
                    case Activation::Identity:
                        for (std::size_t k = 0; k < g.size(); ++k) ag[k] += g[k];
                        break;
                }
                break;
            }
            case Op::Sum: {
                Matrix& ag = nodes_[n.a].grad;
                for (std::size_t k = 0; k < ag.size(); ++k) ag[k] += g[0];
                break;
            }
            case Op::Spmm: {
                Matrix& ag = nodes_[n.a].grad;
                const auto& adj = *n.adj;
                // x_bar_j += w_ij * y_bar_i  (transpose layout walk)
                for (std::uint32_t i = 0; i < adj.num_nodes; ++i)
                    for (std::uint32_t k = adj.row_offsets[i]; k < adj.row_offsets[i + 1]; ++k) {
                        const std::uint32_t j = adj.col_indices[k];
                        const double w = adj.weights[k];
                        for (std::size_t c = 0; c < ag.cols(); ++c) ag(j, c) += w * g(i, c);
                    }
                break;
            }
            case Op::EdgeScores: {
                const Matrix& x = nodes_[n.a].value;
                const Matrix& a = nodes_[n.b].value;
                Matrix& xg = nodes_[n.a].grad;
                Matrix& agr = nodes_[n.b].grad;
                const std::size_t m = x.cols();
                const auto& offs = n.graph->loop_row_offsets();
                const auto& cols = n.graph->loop_col_indices();
                for (std::uint32_t i = 0; i < n.graph->num_nodes(); ++i)
                    for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) {
                        const std::uint32_t j = cols[k];
                        const double d = n.aux(k, 0) > 0.0 ? 1.0 : n.scalar;
                        const double gk = g(k, 0) * d;
                        if (gk == 0.0) continue;
                        for (std::size_t f = 0; f < m; ++f) {
                            xg(i, f) += gk * a(f, 0);
                            xg(j, f) += gk * a(m + f, 0);
                            agr(f, 0) += gk * x(i, f);
                            agr(m + f, 0) += gk * x(j, f);
                        }
                    }
                break;
            }
            case Op::NeighborSoftmax: {
                Matrix& sg = nodes_[n.a].grad;
                const auto& offs = n.graph->loop_row_offsets();
                for (std::uint32_t i = 0; i < n.graph->num_nodes(); ++i) {
                    double dot = 0.0;
                    for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k)
                        dot += n.value(k, 0) * g(k, 0);
                    for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k)
                        sg(k, 0) += n.value(k, 0) * (g(k, 0) - dot);
                }
                break;
            }
            case Op::AttnAggregate: {
                const Matrix& w = nodes_[n.a].value;
                const Matrix& x = nodes_[n.b].value;
                Matrix& wg = nodes_[n.a].grad;
                Matrix& xg = nodes_[n.b].grad;
                const auto& offs = n.graph->loop_row_offsets();
                const auto& cols = n.graph->loop_col_indices();
                for (std::uint32_t i = 0; i < n.graph->num_nodes(); ++i)
                    for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) {
                        const std::uint32_t j = cols[k];
                        double dot = 0.0;
                        for (std::size_t c = 0; c < x.cols(); ++c) {
                            dot += g(i, c) * x(j, c);
                            xg(j, c) += w(k, 0) * g(i, c);
                        }
                        wg(k, 0) += dot;
                    }
                break;
            }
            case Op::MseLoss: {
                Matrix& pg = nodes_[n.a].grad;
                const double s = g[0] / n.scalar;
                if (!n.indices.empty()) {
                    for (std::uint32_t r : n.indices)
                        for (std::size_t c = 0; c < pg.cols(); ++c)
                            pg(r, c) += s * n.aux(r, c);
                } else {
                    for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += s * n.aux[k];
                }
                break;
            }
            case Op::CrossEntropy: {
                Matrix& zg = nodes_[n.a].grad;
                const double s = g[0] / n.scalar;
                const std::size_t v = zg.rows();
                // indices layout: labels[0..v), sentinel at [v], masked rows after
                for (std::size_t p = v + 1; p < n.indices.size(); ++p) {
                    const std::uint32_t r = n.indices[p];
                    for (std::size_t c = 0; c < zg.cols(); ++c) {
                        double delta = n.aux(r, c);
                        if (c == n.indices[r]) delta -= 1.0;
                        zg(r, c) += s * delta;
                    }
                }
                break;
            }
        }
    }
}

} // namespace graphcon
