#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "graphcon/graph.hpp"
#include "graphcon/rng.hpp"
#include "graphcon/tape.hpp"

using namespace graphcon;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(lo, hi);
    return m;
}

// Central-difference gradient of a scalar function of several matrix inputs.
// builder re-runs the forward pass from scratch for each perturbation.
using Builder = std::function<double(const std::vector<Matrix>&)>;

Matrix fd_grad(const Builder& f, std::vector<Matrix> inputs, std::size_t which, double h = 1e-6) {
    Matrix g(inputs[which].rows(), inputs[which].cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double orig = inputs[which][i];
        inputs[which][i] = orig + h;
        const double fp = f(inputs);
        inputs[which][i] = orig - h;
        const double fm = f(inputs);
        inputs[which][i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

void check_close(const Matrix& a, const Matrix& b, double rel_tol, double floor = 1e-7) {
    REQUIRE(a.same_shape(b));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max(std::abs(a[i]), std::abs(b[i]));
        if (scale < floor) continue;
        CHECK(std::abs(a[i] - b[i]) / scale <= rel_tol);
    }
}

} // namespace

TEST_CASE("matmul forward and the all-ones sum gradient") {
    Tape tape;
    Matrix m(2, 3);
    for (std::size_t i = 0; i < 6; ++i) m[i] = static_cast<double>(i) - 2.5;
    Var mv = tape.leaf(m);
    Var iv = tape.leaf(Matrix::identity(2));
    Var prod = tape.matmul(iv, mv);
    for (std::size_t i = 0; i < 6; ++i) CHECK(prod.value()[i] == m[i]);
    Var loss = tape.sum(prod);
    tape.backward(loss);
    for (std::size_t i = 0; i < 6; ++i) CHECK(mv.grad()[i] == 1.0);
}

TEST_CASE("scale by zero kills values and upstream gradients") {
    Tape tape;
    Rng rng(5);
    Var x = tape.leaf(random_matrix(rng, 3, 3));
    Var z = tape.scale(x, 0.0);
    for (std::size_t i = 0; i < 9; ++i) CHECK(z.value()[i] == 0.0);
    tape.backward(tape.sum(z));
    for (std::size_t i = 0; i < 9; ++i) CHECK(x.grad()[i] == 0.0);
}

TEST_CASE("matmul gradient matches central differences") {
    Rng rng(42);
    const Matrix a = random_matrix(rng, 3, 4);
    const Matrix b = random_matrix(rng, 4, 2);
    auto f = [](const std::vector<Matrix>& in) {
        Tape t;
        return t.sum(t.hadamard(t.matmul(t.leaf(in[0]), t.leaf(in[1])),
                                t.matmul(t.leaf(in[0]), t.leaf(in[1]))))
            .value()(0, 0);
    };
    Tape tape;
    Var av = tape.leaf(a), bv = tape.leaf(b);
    Var prod = tape.matmul(av, bv);
    tape.backward(tape.sum(tape.hadamard(prod, prod)));
    check_close(av.grad(), fd_grad(f, {a, b}, 0), 1e-6);
    check_close(bv.grad(), fd_grad(f, {a, b}, 1), 1e-6);
}

TEST_CASE("activations forward values and derivative at zero") {
    Tape tape;
    Matrix x(1, 2);
    x[0] = -1.0;
    x[1] = 2.0;
    Var r = tape.activation(tape.leaf(x), Activation::Relu);
    CHECK(r.value()[0] == 0.0);
    CHECK(r.value()[1] == 2.0);

    Matrix z(1, 1);
    Var t = tape.activation(tape.leaf(z), Activation::Tanh);
    CHECK(t.value()[0] == 0.0);
    tape.backward(tape.sum(t));
    // derivative of tanh at 0 is 1
    CHECK(tape.grad(t.idx - 1)(0, 0) == 1.0);
}

TEST_CASE("activation gradients match central differences away from kinks") {
    Rng rng(9);
    Matrix x = random_matrix(rng, 5, 5);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i]) < 1e-3) x[i] += 0.5;  // stay clear of the relu kink
    for (auto kind : {Activation::Relu, Activation::Tanh, Activation::Identity}) {
        auto f = [kind](const std::vector<Matrix>& in) {
            Tape t;
            Var a = t.activation(t.leaf(in[0]), kind);
            return t.sum(t.hadamard(a, a)).value()(0, 0);
        };
        Tape tape;
        Var xv = tape.leaf(x);
        Var a = tape.activation(xv, kind);
        tape.backward(tape.sum(tape.hadamard(a, a)));
        check_close(xv.grad(), fd_grad(f, {x}, 0), 1e-6);
    }
}

TEST_CASE("spmm identity on isolated self-loop nodes") {
    const Graph lone = Graph::from_edge_list({}, 3);
    const auto adj = normalized_adjacency(lone, AdjacencyKind::SymGCN);
    Tape tape;
    Rng rng(2);
    const Matrix x = random_matrix(rng, 3, 2);
    Var y = tape.spmm(&adj, tape.leaf(x));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.value()[i] == x[i]);
}

TEST_CASE("spmm on a 2-path averages") {
    const Graph path = Graph::grid(2, 1);
    const auto adj = normalized_adjacency(path, AdjacencyKind::SymGCN);
    Tape tape;
    Matrix x(2, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 3.0;
    Var y = tape.spmm(&adj, tape.leaf(x));
    CHECK(y.value()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(y.value()(1, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("spmm equals dense multiply on a random graph") {
    Rng rng(17);
    EdgeList edges;
    for (int k = 0; k < 12; ++k) {
        const auto a = static_cast<std::uint32_t>(rng.below(8));
        const auto b = static_cast<std::uint32_t>(rng.below(8));
        if (a != b) edges.emplace_back(a, b);
    }
    const Graph g = Graph::from_edge_list(edges, 8);
    for (auto kind : {AdjacencyKind::SymGCN, AdjacencyKind::RowStochastic}) {
        const auto adj = normalized_adjacency(g, kind);
        const Matrix x = random_matrix(rng, 8, 3);
        Tape tape;
        Var y = tape.spmm(&adj, tape.leaf(x));
        const Matrix dense = matmul(adj.dense(), x);
        for (std::size_t i = 0; i < dense.size(); ++i)
            CHECK(std::abs(y.value()[i] - dense[i]) <= 1e-12);
    }
}

TEST_CASE("spmm backward uses the transpose layout") {
    Rng rng(19);
    const Graph g = Graph::grid(3, 2);
    const auto adj = normalized_adjacency(g, AdjacencyKind::RowStochastic);  // asymmetric
    const Matrix x = random_matrix(rng, 6, 2);
    auto f = [&adj](const std::vector<Matrix>& in) {
        Tape t;
        Var y = t.spmm(&adj, t.leaf(in[0]));
        return t.sum(t.hadamard(y, y)).value()(0, 0);
    };
    Tape tape;
    Var xv = tape.leaf(x);
    Var y = tape.spmm(&adj, xv);
    tape.backward(tape.sum(tape.hadamard(y, y)));
    check_close(xv.grad(), fd_grad(f, {x}, 0), 1e-6);
}

TEST_CASE("edge scores: zero attention vector zeroes all scores") {
    const Graph path = Graph::grid(2, 1);
    Tape tape;
    Rng rng(3);
    Var scores = tape.edge_scores(tape.leaf(random_matrix(rng, 2, 2)),
                                  tape.leaf(Matrix(4, 1)), &path, 0.2);
    for (std::size_t i = 0; i < scores.value().size(); ++i) CHECK(scores.value()[i] == 0.0);
}

TEST_CASE("edge scores: hand-computed single edge") {
    // a = [1,1], xw = [[2],[3]]: score(0,1) = 2 + 3 = 5, positive so LeakyReLU passes it
    const Graph path = Graph::grid(2, 1);
    Tape tape;
    Matrix xw(2, 1);
    xw(0, 0) = 2.0;
    xw(1, 0) = 3.0;
    Matrix att(2, 1, 1.0);
    Var scores = tape.edge_scores(tape.leaf(xw), tape.leaf(att), &path, 0.2);
    // loop layout row 0: cols {0,1} -> pairs (0,0),(0,1)
    CHECK(scores.value()(0, 0) == 4.0);   // self pair (0,0): 2 + 2
    CHECK(scores.value()(1, 0) == 5.0);   // (0,1): 2 + 3
    CHECK(scores.value()(2, 0) == 5.0);   // (1,0): 3 + 2
    CHECK(scores.value()(3, 0) == 6.0);   // self pair (1,1)
}

TEST_CASE("edge scores match a dense per-pair recomputation and differentiate") {
    Rng rng(29);
    const Graph g = Graph::grid(3, 2);
    const Matrix xw = random_matrix(rng, 6, 3);
    const Matrix att = random_matrix(rng, 6, 1);
    const double slope = 0.2;
    Tape tape;
    Var sv = tape.edge_scores(tape.leaf(xw), tape.leaf(att), &g, slope);
    const auto& offs = g.loop_row_offsets();
    const auto& cols = g.loop_col_indices();
    for (std::uint32_t i = 0; i < 6; ++i)
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) {
            const std::uint32_t j = cols[k];
            double s = 0.0;
            for (std::size_t f = 0; f < 3; ++f) s += att(f, 0) * xw(i, f) + att(3 + f, 0) * xw(j, f);
            const double expect = s > 0 ? s : slope * s;
            CHECK(std::abs(sv.value()(k, 0) - expect) <= 1e-12);
        }
    auto f = [&g, slope](const std::vector<Matrix>& in) {
        Tape t;
        Var s = t.edge_scores(t.leaf(in[0]), t.leaf(in[1]), &g, slope);
        return t.sum(t.hadamard(s, s)).value()(0, 0);
    };
    Tape t2;
    Var xv = t2.leaf(xw), av = t2.leaf(att);
    Var s2 = t2.edge_scores(xv, av, &g, slope);
    t2.backward(t2.sum(t2.hadamard(s2, s2)));
    check_close(xv.grad(), fd_grad(f, {xw, att}, 0), 1e-5);
    check_close(av.grad(), fd_grad(f, {xw, att}, 1), 1e-5);
}

TEST_CASE("neighbor softmax: equal scores give uniform weights") {
    const Graph g = Graph::grid(3, 1);
    Tape tape;
    Var w = tape.neighbor_softmax(tape.leaf(Matrix(g.num_loop_pairs(), 1, 0.7)), &g);
    const auto& offs = g.loop_row_offsets();
    for (std::uint32_t i = 0; i < 3; ++i) {
        const double deg = static_cast<double>(offs[i + 1] - offs[i]);
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k)
            CHECK(w.value()(k, 0) == doctest::Approx(1.0 / deg).epsilon(1e-14));
    }
}

TEST_CASE("neighbor softmax: scores (0, ln 3) give weights (1/4, 3/4)") {
    // one node with exactly two in-neighborhood entries: 2-path, row 0 has (0,0) and (0,1)
    const Graph path = Graph::grid(2, 1);
    Tape tape;
    Matrix s(4, 1);
    s(0, 0) = 0.0;
    s(1, 0) = std::log(3.0);
    Var w = tape.neighbor_softmax(tape.leaf(s), &path);
    CHECK(w.value()(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(w.value()(1, 0) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("neighbor softmax rows are right-stochastic and differentiable") {
    Rng rng(37);
    const Graph g = Graph::grid(4, 2);
    const Matrix s = random_matrix(rng, g.num_loop_pairs(), 1, -40.0, 40.0);
    Tape tape;
    Var sv = tape.leaf(s);
    Var w = tape.neighbor_softmax(sv, &g);
    const auto& offs = g.loop_row_offsets();
    for (std::uint32_t i = 0; i < 8; ++i) {
        double sum = 0.0;
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) {
            const double x = w.value()(k, 0);
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
            sum += x;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    auto f = [&g](const std::vector<Matrix>& in) {
        Tape t;
        Var w2 = t.neighbor_softmax(t.leaf(in[0]), &g);
        return t.sum(t.hadamard(w2, w2)).value()(0, 0);
    };
    Matrix small = s;
    for (std::size_t i = 0; i < small.size(); ++i) small[i] *= 0.05;  // keep FD well-conditioned
    Tape t3;
    Var sv3 = t3.leaf(small);
    Var w3 = t3.neighbor_softmax(sv3, &g);
    t3.backward(t3.sum(t3.hadamard(w3, w3)));
    check_close(sv3.grad(), fd_grad(f, {small}, 0), 1e-5);
}

TEST_CASE("attn aggregate: unit self-loop weights reproduce the input") {
    const Graph path = Graph::grid(2, 1);
    Tape tape;
    Rng rng(41);
    const Matrix xw = random_matrix(rng, 2, 3);
    Matrix w(4, 1);
    // loop layout: (0,0),(0,1),(1,0),(1,1) — put weight 1 on the self pairs
    w(0, 0) = 1.0;
    w(3, 0) = 1.0;
    Var y = tape.attn_aggregate(tape.leaf(w), tape.leaf(xw), &path);
    for (std::size_t i = 0; i < xw.size(); ++i) CHECK(y.value()[i] == xw[i]);
}

TEST_CASE("attn aggregate: uniform weights average the two rows") {
    const Graph path = Graph::grid(2, 1);
    Tape tape;
    const Matrix xw = [] {
        Matrix m(2, 2);
        m(0, 0) = 1.0;
        m(0, 1) = 2.0;
        m(1, 0) = 3.0;
        m(1, 1) = 4.0;
        return m;
    }();
    Var y = tape.attn_aggregate(tape.leaf(Matrix(4, 1, 0.5)), tape.leaf(xw), &path);
    CHECK(y.value()(0, 0) == doctest::Approx(2.0));
    CHECK(y.value()(0, 1) == doctest::Approx(3.0));
    CHECK(y.value()(1, 0) == doctest::Approx(2.0));
    CHECK(y.value()(1, 1) == doctest::Approx(3.0));
}

TEST_CASE("attn aggregate matches a densified attention multiply and differentiates") {
    Rng rng(43);
    const Graph g = Graph::grid(3, 2);
    const Matrix xw = random_matrix(rng, 6, 2);
    Matrix w(g.num_loop_pairs(), 1);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform();
    // densify
    Matrix dense(6, 6);
    const auto& offs = g.loop_row_offsets();
    const auto& cols = g.loop_col_indices();
    for (std::uint32_t i = 0; i < 6; ++i)
        for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) dense(i, cols[k]) = w(k, 0);
    const Matrix expect = matmul(dense, xw);
    Tape tape;
    Var wv = tape.leaf(w), xv = tape.leaf(xw);
    Var y = tape.attn_aggregate(wv, xv, &g);
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(std::abs(y.value()[i] - expect[i]) <= 1e-12);
    auto f = [&g](const std::vector<Matrix>& in) {
        Tape t;
        Var y2 = t.attn_aggregate(t.leaf(in[0]), t.leaf(in[1]), &g);
        return t.sum(t.hadamard(y2, y2)).value()(0, 0);
    };
    tape.backward(tape.sum(tape.hadamard(y, y)));
    check_close(wv.grad(), fd_grad(f, {w, xw}, 0), 1e-5);
    check_close(xv.grad(), fd_grad(f, {w, xw}, 1), 1e-5);
}

TEST_CASE("backward requires a scalar and zeroes unreachable leaves") {
    Tape tape;
    Rng rng(47);
    Var x = tape.leaf(random_matrix(rng, 2, 2));
    CHECK_THROWS_AS(tape.backward(x), std::invalid_argument);
    Var unused = tape.leaf(random_matrix(rng, 3, 1));
    tape.backward(tape.sum(x));
    for (std::size_t i = 0; i < 3; ++i) CHECK(unused.grad()[i] == 0.0);
}

TEST_CASE("gradient of sum(W x) has the outer-product structure") {
    Tape tape;
    Rng rng(51);
    const Matrix w = random_matrix(rng, 3, 4);
    const Matrix x = random_matrix(rng, 4, 2);
    Var wv = tape.leaf(w), xv = tape.leaf(x);
    tape.backward(tape.sum(tape.matmul(wv, xv)));
    // d sum(Wx) / dW = ones * x^T
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            double expect = 0.0;
            for (std::size_t j = 0; j < 2; ++j) expect += x(c, j);
            CHECK(wv.grad()(r, c) == doctest::Approx(expect).epsilon(1e-14));
        }
}

TEST_CASE("mse loss values and gradient") {
    Tape tape;
    Matrix pred(2, 1), target(2, 1);
    target(0, 0) = 2.0;
    Var pv = tape.leaf(pred);
    Var loss = tape.mse_loss(pv, target);
    CHECK(loss.value()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));  // (1/4) * 4
    tape.backward(loss);
    CHECK(pv.grad()(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));  // (pred - target)/v
    CHECK(pv.grad()(1, 0) == 0.0);

    Tape t2;
    Var same = t2.leaf(target);
    CHECK(t2.mse_loss(same, target).value()(0, 0) == 0.0);

    std::vector<std::uint32_t> empty;
    Tape t3;
    CHECK_THROWS_AS(t3.mse_loss(t3.leaf(pred), target, &empty), std::invalid_argument);
}

TEST_CASE("cross entropy value cases and finite-difference gradient") {
    Tape tape;
    Matrix logits(2, 4);  // uniform rows
    std::vector<std::uint32_t> labels{1, 3};
    Var lv = tape.leaf(logits);
    Var loss = tape.cross_entropy_loss(lv, labels);
    CHECK(loss.value()(0, 0) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

    Tape t2;
    Matrix hot(1, 3);
    hot(0, 2) = 50.0;
    CHECK(t2.cross_entropy_loss(t2.leaf(hot), {2}).value()(0, 0) ==
          doctest::Approx(0.0).epsilon(1e-12));

    Tape t3;
    CHECK_THROWS_AS(t3.cross_entropy_loss(t3.leaf(hot), {7}), std::invalid_argument);

    Rng rng(53);
    const Matrix z = random_matrix(rng, 3, 4);
    std::vector<std::uint32_t> labs{0, 2, 3};
    auto f = [&labs](const std::vector<Matrix>& in) {
        Tape t;
        return t.cross_entropy_loss(t.leaf(in[0]), labs).value()(0, 0);
    };
    Tape t4;
    Var zv = t4.leaf(z);
    t4.backward(t4.cross_entropy_loss(zv, labs));
    check_close(zv.grad(), fd_grad(f, {z}, 0), 1e-5);
}

TEST_CASE("concat and slice invert each other and route gradients") {
    Rng rng(59);
    const Matrix a = random_matrix(rng, 3, 2);
    const Matrix b = random_matrix(rng, 3, 4);
    Tape tape;
    Var av = tape.leaf(a), bv = tape.leaf(b);
    Var cat = tape.concat_cols(av, bv);
    CHECK(cat.value().cols() == 6);
    Var sl = tape.slice_rows(cat, 1, 3);
    CHECK(sl.value().rows() == 2);
    tape.backward(tape.sum(sl));
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(av.grad()(0, c) == 0.0);
        CHECK(av.grad()(1, c) == 1.0);
        CHECK(av.grad()(2, c) == 1.0);
    }
    auto f = [](const std::vector<Matrix>& in) {
        Tape t;
        Var cat2 = t.concat_cols(t.leaf(in[0]), t.leaf(in[1]));
        Var s = t.slice_rows(cat2, 1, 3);
        return t.sum(t.hadamard(s, s)).value()(0, 0);
    };
    Tape t2;
    Var a2 = t2.leaf(a), b2 = t2.leaf(b);
    Var s2 = t2.slice_rows(t2.concat_cols(a2, b2), 1, 3);
    t2.backward(t2.sum(t2.hadamard(s2, s2)));
    check_close(a2.grad(), fd_grad(f, {a, b}, 0), 1e-6);
    check_close(b2.grad(), fd_grad(f, {a, b}, 1), 1e-6);
}

TEST_CASE("universal finite-difference property on a composed program") {
    // sum( tanh(A (B . C)) W ) with spmm and attention mixed in
    Rng rng(61);
    const Graph g = Graph::grid(2, 2);
    const auto adj = normalized_adjacency(g, AdjacencyKind::SymGCN);
    const Matrix x = random_matrix(rng, 4, 3);
    const Matrix w = random_matrix(rng, 3, 3);
    const Matrix att = random_matrix(rng, 6, 1);
    auto f = [&](const std::vector<Matrix>& in) {
        Tape t;
        Var xv = t.leaf(in[0]);
        Var wv = t.leaf(in[1]);
        Var av = t.leaf(in[2]);
        Var xw = t.matmul(xv, wv);
        Var mixed = t.add(t.spmm(&adj, xw), xw);
        Var sc = t.edge_scores(t.activation(mixed, Activation::Tanh), av, &g, 0.2);
        Var al = t.neighbor_softmax(sc, &g);
        Var agg = t.attn_aggregate(al, mixed, &g);
        return t.sum(t.hadamard(agg, agg)).value()(0, 0);
    };
    Tape tape;
    Var xv = tape.leaf(x), wv = tape.leaf(w), av = tape.leaf(att);
    Var xw = tape.matmul(xv, wv);
    Var mixed = tape.add(tape.spmm(&adj, xw), xw);
    Var sc = tape.edge_scores(tape.activation(mixed, Activation::Tanh), av, &g, 0.2);
    Var al = tape.neighbor_softmax(sc, &g);
    Var agg = tape.attn_aggregate(al, mixed, &g);
    tape.backward(tape.sum(tape.hadamard(agg, agg)));
    check_close(xv.grad(), fd_grad(f, {x, w, att}, 0), 1e-5);
    check_close(wv.grad(), fd_grad(f, {x, w, att}, 1), 1e-5);
    check_close(av.grad(), fd_grad(f, {x, w, att}, 2), 1e-5);
}

TEST_CASE("identical programs produce bit-identical values and gradients") {
    Rng rng1(71), rng2(71);
    auto run = [](Rng& rng, Matrix& grad_out) {
        const Graph g = Graph::grid(3, 1);
        const auto adj = normalized_adjacency(g, AdjacencyKind::SymGCN);
        Tape t;
        Var x = t.leaf(random_matrix(rng, 3, 2));
        Var w = t.leaf(random_matrix(rng, 2, 2));
        Var y = t.activation(t.spmm(&adj, t.matmul(x, w)), Activation::Tanh);
        Var loss = t.sum(t.hadamard(y, y));
        t.backward(loss);
        grad_out = w.grad();
        return loss.value()(0, 0);
    };
    Matrix g1, g2;
    const double v1 = run(rng1, g1);
    const double v2 = run(rng2, g2);
    CHECK(v1 == v2);
    CHECK(g1 == g2);
}

TEST_CASE("shape mismatches are rejected") {
    Tape tape;
    Var a = tape.leaf(Matrix(2, 3));
    Var b = tape.leaf(Matrix(2, 2));
    CHECK_THROWS_AS(tape.add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(tape.matmul(a, a), std::invalid_argument);
    CHECK_THROWS_AS(tape.hadamard(a, b), std::invalid_argument);
}

TEST_CASE("spmm matches the dense oracle across random graphs and both kinds") {
    Rng rng(8899);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t v = 2 + static_cast<std::uint32_t>(rng.below(9));
        EdgeList edges;
        for (std::uint32_t k = 0; k < 2 * v; ++k) {
            const auto a = static_cast<std::uint32_t>(rng.below(v));
            const auto b = static_cast<std::uint32_t>(rng.below(v));
            if (a != b) edges.emplace_back(a, b);
        }
        const Graph g = Graph::from_edge_list(edges, v);
        const auto kind = trial % 2 ? AdjacencyKind::SymGCN : AdjacencyKind::RowStochastic;
        const auto adj = normalized_adjacency(g, kind);
        const Matrix x = random_matrix(rng, v, 1 + trial % 3);
        Tape tape;
        Var y = tape.spmm(&adj, tape.leaf(x));
        const Matrix expect = matmul(adj.dense(), x);
        for (std::size_t i = 0; i < expect.size(); ++i)
            CHECK(std::abs(y.value()[i] - expect[i]) <= 1e-12);
    }
}

TEST_CASE("neighbor softmax stays right-stochastic across random graphs") {
    Rng rng(9911);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t v = 2 + static_cast<std::uint32_t>(rng.below(8));
        EdgeList edges;
        for (std::uint32_t k = 0; k < 2 * v; ++k) {
            const auto a = static_cast<std::uint32_t>(rng.below(v));
            const auto b = static_cast<std::uint32_t>(rng.below(v));
            if (a != b) edges.emplace_back(a, b);
        }
        const Graph g = Graph::from_edge_list(edges, v);
        const Matrix s = random_matrix(rng, g.num_loop_pairs(), 1, -60.0, 60.0);
        Tape tape;
        Var w = tape.neighbor_softmax(tape.leaf(s), &g);
        const auto& offs = g.loop_row_offsets();
        for (std::uint32_t i = 0; i < v; ++i) {
            double sum = 0.0;
            for (std::uint32_t k = offs[i]; k < offs[i + 1]; ++k) {
                CHECK(w.value()(k, 0) >= 0.0);
                CHECK(w.value()(k, 0) <= 1.0);
                sum += w.value()(k, 0);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("operands from another tape are rejected") {
    Tape t1, t2;
    Var a = t1.leaf(Matrix(2, 2, 1.0));
    Var b = t2.leaf(Matrix(2, 2, 1.0));
    CHECK_THROWS_AS(t1.add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(t2.sum(a), std::invalid_argument);
}
