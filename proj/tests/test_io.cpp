#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "graphcon/io.hpp"
#include "graphcon/rng.hpp"

using namespace graphcon;

namespace {
std::string temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}
} // namespace

TEST_CASE("format_double round-trips exactly") {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("dataset save and load round trip") {
    const std::string dir = temp_dir("graphcon_ds");
    Dataset ds = gen_sbm(30, 3, 0.5, 0.05, 9);
    save_dataset(dir, ds);
    Dataset back = load_dataset(dir + "/edges.tsv", dir + "/features.csv", dir + "/labels.txt",
                                dir + "/splits.json");
    CHECK(back.graph.num_nodes() == ds.graph.num_nodes());
    CHECK(back.graph.col_indices() == ds.graph.col_indices());
    CHECK(back.labels == ds.labels);
    REQUIRE(back.splits.has_value());
    CHECK(back.splits->train == ds.splits->train);
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        CHECK(back.features[i] == ds.features[i]);
    std::filesystem::remove_all(dir);
}

TEST_CASE("two-node toy dataset") {
    const std::string dir = temp_dir("graphcon_toy");
    {
        std::ofstream e(dir + "/edges.tsv");
        e << "# toy\n0\t1\n";
        std::ofstream f(dir + "/features.csv");
        f << "1.0,0.0\n0.0,1.0\n";
    }
    const Dataset ds = load_dataset(dir + "/edges.tsv", dir + "/features.csv");
    CHECK(ds.graph.num_nodes() == 2);
    CHECK(ds.features.rows() == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("feature row mismatch is reported with both counts") {
    const std::string dir = temp_dir("graphcon_bad");
    {
        std::ofstream e(dir + "/edges.tsv");
        e << "0\t1\n1\t2\n";
        std::ofstream f(dir + "/features.csv");
        f << "1.0\n2.0\n";  // only 2 rows for 3 nodes
    }
    CHECK_THROWS_WITH_AS(load_dataset(dir + "/edges.tsv", dir + "/features.csv"),
                         doctest::Contains("2"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sparse node ids are remapped by sorted order with the mapping kept") {
    const std::string dir = temp_dir("graphcon_remap");
    {
        std::ofstream e(dir + "/edges.tsv");
        e << "10\t30\n30\t20\n";
        std::ofstream f(dir + "/features.csv");
        f << "1.0\n2.0\n3.0\n";
    }
    const Dataset ds = load_dataset(dir + "/edges.tsv", dir + "/features.csv");
    CHECK(ds.graph.num_nodes() == 3);
    CHECK(ds.id_map == std::vector<std::uint64_t>{10, 20, 30});
    // 10 -> 0, 20 -> 1, 30 -> 2: edges {0,2} and {1,2}
    CHECK(ds.graph.degree(2) == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sbm generator basics") {
    // p_in = 1, p_out = 0 gives two cliques
    Dataset cl = gen_sbm(10, 2, 1.0, 0.0, 3);
    CHECK(cl.graph.num_undirected_edges() == 2 * (5 * 4 / 2));
    for (std::uint32_t i = 0; i < 5; ++i) CHECK(cl.labels[i] == 0);
    for (std::uint32_t i = 5; i < 10; ++i) CHECK(cl.labels[i] == 1);

    Dataset a = gen_sbm(200, 2, 0.1, 0.01, 77);
    Dataset b = gen_sbm(200, 2, 0.1, 0.01, 77);
    CHECK(a.graph.col_indices() == b.graph.col_indices());
    for (std::size_t i = 0; i < a.features.size(); ++i) CHECK(a.features[i] == b.features[i]);

    CHECK_THROWS_AS(gen_sbm(10, 2, 1.5, 0.0, 1), std::invalid_argument);
}

TEST_CASE("sbm edge count sits within three sigma of the binomial mean") {
    const std::uint32_t v = 200;
    const double p_in = 0.1, p_out = 0.01;
    // block sizes 100/100: within-pairs 2 * C(100,2), across-pairs 100*100
    const double n_in = 2.0 * (100.0 * 99.0 / 2.0);
    const double n_out = 100.0 * 100.0;
    const double mean = n_in * p_in + n_out * p_out;
    const double var = n_in * p_in * (1 - p_in) + n_out * p_out * (1 - p_out);
    const double sigma = std::sqrt(var);
    double total = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s)
        total += static_cast<double>(gen_sbm(v, 2, p_in, p_out, 1000 + s).graph
                                         .num_undirected_edges());
    const double avg = total / seeds;
    CHECK(std::abs(avg - mean) <= 3.0 * sigma / std::sqrt(static_cast<double>(seeds)));
}

TEST_CASE("checkpoints round trip bit for bit") {
    const std::string dir = temp_dir("graphcon_ckpt");
    ModelConfig cfg;
    cfg.raw_width = 3;
    cfg.hidden_width = 4;
    cfg.out_width = 2;
    cfg.coupling.kind = CouplingKind::GAT;
    cfg.coupling.feature_width = 4;
    cfg.coupling.num_layers = 2;
    cfg.integrator.n_layers = 2;
    const ModelParams p = init_model(cfg, 13);
    save_checkpoint(dir + "/ckpt.json", p);
    const ModelParams q = load_checkpoint(dir + "/ckpt.json");
    CHECK(p.encoder == q.encoder);
    CHECK(p.readout == q.readout);
    REQUIRE(p.coupling.weights.size() == q.coupling.weights.size());
    for (std::size_t i = 0; i < p.coupling.weights.size(); ++i)
        CHECK(p.coupling.weights[i] == q.coupling.weights[i]);
    REQUIRE(p.coupling.attention.size() == q.coupling.attention.size());
    for (std::size_t i = 0; i < p.coupling.attention.size(); ++i)
        CHECK(p.coupling.attention[i] == q.coupling.attention[i]);
    std::filesystem::remove_all(dir);
}

TEST_CASE("unknown config keys are rejected by name") {
    CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"sede": 1})"), doctest::Contains("sede"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"train": {"lr": 0.1, "lrr": 2}})"),
                         doctest::Contains("lrr"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_experiment_config(R"({"integrator": {"dt": 1.0, "dampening": 3}})"),
        doctest::Contains("dampening"), std::runtime_error);
}

TEST_CASE("config fields land in the right places") {
    const ExperimentConfig cfg = parse_experiment_config(R"({
        "seed": 9,
        "dataset": {"synthetic": {"nodes": 50, "communities": 2, "p_in": 0.3, "p_out": 0.02}},
        "coupling": {"kind": "gat", "hidden": 8, "share_weights": true},
        "integrator": {"dt": 0.5, "alpha": 0.25, "gamma": 1.5, "layers": 7, "activation": "relu",
                       "y0": "zero"},
        "train": {"optimizer": "sgd_momentum", "lr": 0.05, "epochs": 30, "patience": 5}
    })");
    CHECK(cfg.seed == 9);
    CHECK(cfg.sbm_nodes == 50);
    CHECK(cfg.model.coupling.kind == CouplingKind::GAT);
    CHECK(cfg.model.coupling.share_weights);
    CHECK(cfg.model.hidden_width == 8);
    CHECK(cfg.model.integrator.dt == 0.5);
    CHECK(cfg.model.integrator.alpha == 0.25);
    CHECK(cfg.model.integrator.gamma == 1.5);
    CHECK(cfg.model.integrator.n_layers == 7);
    CHECK(cfg.model.integrator.activation == Activation::Relu);
    CHECK(cfg.model.integrator.y0_mode == Y0Mode::Zero);
    CHECK(cfg.train.optimizer == OptimizerKind::SgdMomentum);
    CHECK(cfg.train.learning_rate == 0.05);
}

TEST_CASE("csv tables write a header and parse back losslessly") {
    const std::string dir = temp_dir("graphcon_csv");
    CsvTable t;
    t.header = {"a", "b"};
    Rng rng(5);
    std::vector<double> vals;
    for (int i = 0; i < 10; ++i) {
        const double x = rng.uniform(-5.0, 5.0);
        vals.push_back(x);
        t.rows.push_back({std::to_string(i), format_double(x)});
    }
    t.write(dir + "/t.csv");
    std::ifstream in(dir + "/t.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "a,b");
    for (int i = 0; i < 10; ++i) {
        REQUIRE(std::getline(in, line));
        const auto comma = line.find(',');
        CHECK(std::stod(line.substr(comma + 1)) == vals[i]);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("trajectory csv carries the declared columns") {
    const std::string dir = temp_dir("graphcon_traj");
    std::vector<Matrix> xs(3, Matrix(2, 2, 1.0)), ys(3, Matrix(2, 2, -0.5));
    write_trajectory_csv(dir + "/traj.csv", xs, ys);
    std::ifstream in(dir + "/traj.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "layer,node,feature_index,x,y");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3 * 2 * 2);
    std::filesystem::remove_all(dir);
}
