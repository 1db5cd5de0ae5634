#include "graphcon/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "graphcon/rng.hpp"

namespace graphcon {

using nlohmann::json;

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

LogLevel log_level() {
    const char* env = std::getenv("GRAPHCON_LOG");
    if (!env) return LogLevel::Info;
    const std::string s(env);
    if (s == "error") return LogLevel::Error;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Info;
}

void log_line(LogLevel lvl, const std::string& msg) {
    static const LogLevel active = log_level();
    if (static_cast<int>(lvl) <= static_cast<int>(active)) std::cerr << msg << "\n";
}

namespace {

Matrix read_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": cannot parse '" + cell + "' as a number");
            }
        }
        if (!rows.empty() && row.size() != rows[0].size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": empty feature file");
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[0].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

std::vector<std::uint32_t> read_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint32_t> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        try {
            const long v = std::stol(line);
            if (v < 0) throw std::runtime_error("negative");
            labels.push_back(static_cast<std::uint32_t>(v));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad label '" +
                                     line + "'");
        }
    }
    return labels;
}

std::vector<std::uint32_t> json_index_list(const json& j, const char* name) {
    if (!j.is_array()) throw std::runtime_error(std::string("split key '") + name + "' must be an array");
    std::vector<std::uint32_t> v;
    for (const auto& e : j) v.push_back(e.get<std::uint32_t>());
    return v;
}

} // namespace

Dataset load_dataset(const std::string& edge_path, const std::string& feature_path,
                     const std::optional<std::string>& label_path,
                     const std::optional<std::string>& split_path) {
    // collect raw edges and ids
    std::ifstream in(edge_path);
    if (!in) throw std::runtime_error("cannot open " + edge_path);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
    std::set<std::uint64_t> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        long long a = -1, b = -1;
        if (!(ss >> a >> b) || a < 0 || b < 0)
            throw std::runtime_error(edge_path + ":" + std::to_string(lineno) +
                                     ": malformed edge line");
        raw.emplace_back(a, b);
        ids.insert(static_cast<std::uint64_t>(a));
        ids.insert(static_cast<std::uint64_t>(b));
    }

    Dataset ds;
    ds.features = read_feature_csv(feature_path);
    const std::uint32_t v = static_cast<std::uint32_t>(ds.features.rows());

    // Dense 0-based ids pass through; sparse ids are remapped by sorted order.
    const std::uint64_t max_id = ids.empty() ? 0 : *ids.rbegin();
    std::map<std::uint64_t, std::uint32_t> remap;
    if (!ids.empty() && max_id + 1 == ids.size()) {
        if (max_id >= v)
            throw std::runtime_error("dataset: edge file references node " +
                                     std::to_string(max_id) + " but feature file has " +
                                     std::to_string(v) + " rows");
        ds.id_map.resize(v);
        for (std::uint32_t i = 0; i < v; ++i) ds.id_map[i] = i;
    } else {
        if (ids.size() != v)
            throw std::runtime_error("dataset: " + std::to_string(ids.size()) +
                                     " distinct node ids but feature file has " +
                                     std::to_string(v) + " rows");
        std::uint32_t next = 0;
        for (std::uint64_t id : ids) {
            remap[id] = next++;
            ds.id_map.push_back(id);
        }
    }
    EdgeList edges;
    for (auto [a, b] : raw) {
        const std::uint32_t ia = remap.empty() ? static_cast<std::uint32_t>(a) : remap.at(a);
        const std::uint32_t ib = remap.empty() ? static_cast<std::uint32_t>(b) : remap.at(b);
        edges.emplace_back(ia, ib);
    }
    ds.graph = Graph::from_edge_list(edges, v);

    if (label_path) {
        ds.labels = read_label_file(*label_path);
        if (ds.labels.size() != v)
            throw std::runtime_error("dataset: " + std::to_string(ds.labels.size()) +
                                     " labels but " + std::to_string(v) + " nodes");
        for (std::uint32_t lab : ds.labels) ds.num_classes = std::max<std::size_t>(ds.num_classes, lab + 1);
    }
    if (split_path) {
        std::ifstream sf(*split_path);
        if (!sf) throw std::runtime_error("cannot open " + *split_path);
        json j = json::parse(sf);
        SplitSpec sp;
        sp.train = json_index_list(j.at("train"), "train");
        sp.val = json_index_list(j.at("val"), "val");
        sp.test = json_index_list(j.at("test"), "test");
        for (auto& set : {sp.train, sp.val, sp.test})
            for (std::uint32_t i : set)
                if (i >= v) throw std::runtime_error("split index " + std::to_string(i) + " >= v");
        ds.splits = std::move(sp);
    }
    return ds;
}

void save_dataset(const std::string& dir, const Dataset& ds) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_edge_file(dir + "/edges.tsv", ds.graph);
    {
        std::ofstream out(dir + "/features.csv");
        for (std::size_t r = 0; r < ds.features.rows(); ++r) {
            for (std::size_t c = 0; c < ds.features.cols(); ++c) {
                if (c) out << ',';
                out << format_double(ds.features(r, c));
            }
            out << '\n';
        }
    }
    if (!ds.labels.empty()) {
        std::ofstream out(dir + "/labels.txt");
        for (std::uint32_t lab : ds.labels) out << lab << '\n';
    }
    if (ds.splits) {
        json j;
        j["train"] = ds.splits->train;
        j["val"] = ds.splits->val;
        j["test"] = ds.splits->test;
        std::ofstream out(dir + "/splits.json");
        out << j.dump(2) << '\n';
    }
}

Dataset gen_sbm(std::uint32_t num_nodes, std::uint32_t num_communities, double p_in, double p_out,
                std::uint64_t seed) {
    if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0)
        throw std::invalid_argument("gen_sbm: probabilities must lie in [0,1]");
    if (num_communities == 0 || num_nodes == 0)
        throw std::invalid_argument("gen_sbm: need nodes and communities");
    Rng rng(seed);
    Dataset ds;
    std::vector<std::uint32_t> comm(num_nodes);
    for (std::uint32_t i = 0; i < num_nodes; ++i)
        comm[i] = static_cast<std::uint32_t>(
            (static_cast<std::uint64_t>(i) * num_communities) / num_nodes);
    EdgeList edges;
    for (std::uint32_t i = 0; i < num_nodes; ++i)
        for (std::uint32_t j = i + 1; j < num_nodes; ++j) {
            const double p = comm[i] == comm[j] ? p_in : p_out;
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    ds.graph = Graph::from_edge_list(edges, num_nodes);
    ds.labels = comm;
    ds.num_classes = num_communities;
    ds.features = Matrix(num_nodes, num_communities);
    for (std::uint32_t i = 0; i < num_nodes; ++i)
        for (std::uint32_t c = 0; c < num_communities; ++c)
            ds.features(i, c) = (comm[i] == c ? 1.0 : 0.0) + 0.5 * rng.gaussian();
    ds.id_map.resize(num_nodes);
    for (std::uint32_t i = 0; i < num_nodes; ++i) ds.id_map[i] = i;
    ds.splits = make_splits(num_nodes, seed);
    return ds;
}

SplitSpec make_splits(std::uint32_t num_nodes, std::uint64_t seed, double train_frac,
                      double val_frac) {
    Rng rng(seed + 0x5b1u);
    std::vector<std::uint32_t> idx(num_nodes);
    for (std::uint32_t i = 0; i < num_nodes; ++i) idx[i] = i;
    for (std::uint32_t i = num_nodes; i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
    const auto ntr = static_cast<std::size_t>(train_frac * num_nodes);
    const auto nva = static_cast<std::size_t>(val_frac * num_nodes);
    SplitSpec sp;
    sp.train.assign(idx.begin(), idx.begin() + ntr);
    sp.val.assign(idx.begin() + ntr, idx.begin() + ntr + nva);
    sp.test.assign(idx.begin() + ntr + nva, idx.end());
    return sp;
}

namespace {
json matrix_to_json(const std::string& name, const Matrix& m) {
    json j;
    j["name"] = name;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> data(m.data(), m.data() + m.size());
    j["data"] = data;
    return j;
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto& data = j.at("data");
    if (data.size() != m.size()) throw std::runtime_error("checkpoint: data length != rows*cols");
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = data[i].get<double>();
    return m;
}
} // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
    json arrays = json::array();
    arrays.push_back(matrix_to_json("encoder", params.encoder));
    arrays.push_back(matrix_to_json("readout", params.readout));
    for (std::size_t i = 0; i < params.coupling.weights.size(); ++i)
        arrays.push_back(matrix_to_json("coupling_w" + std::to_string(i), params.coupling.weights[i]));
    for (std::size_t i = 0; i < params.coupling.attention.size(); ++i)
        arrays.push_back(matrix_to_json("coupling_a" + std::to_string(i), params.coupling.attention[i]));
    json j;
    j["format"] = "graphcon-checkpoint-v1";
    j["arrays"] = std::move(arrays);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j = json::parse(in);
    if (j.value("format", "") != "graphcon-checkpoint-v1")
        throw std::runtime_error("checkpoint: unknown format");
    ModelParams p;
    for (const auto& a : j.at("arrays")) {
        const std::string name = a.at("name").get<std::string>();
        Matrix m = matrix_from_json(a);
        if (name == "encoder") p.encoder = std::move(m);
        else if (name == "readout") p.readout = std::move(m);
        else if (name.rfind("coupling_w", 0) == 0) p.coupling.weights.push_back(std::move(m));
        else if (name.rfind("coupling_a", 0) == 0) p.coupling.attention.push_back(std::move(m));
        else throw std::runtime_error("checkpoint: unknown array '" + name + "'");
    }
    return p;
}

void write_trajectory_csv(const std::string& path, const std::vector<Matrix>& xs,
                          const std::vector<Matrix>& ys) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "layer,node,feature_index,x,y\n";
    for (std::size_t n = 0; n < xs.size(); ++n)
        for (std::size_t i = 0; i < xs[n].rows(); ++i)
            for (std::size_t c = 0; c < xs[n].cols(); ++c) {
                out << n << ',' << i << ',' << c << ',' << format_double(xs[n](i, c)) << ',';
                out << (n < ys.size() ? format_double(ys[n](i, c)) : "0") << '\n';
            }
}

void CsvTable::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out << ',';
        out << header[c];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << row[c];
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Experiment config
// ---------------------------------------------------------------------------

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + ctx);
}

Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    if (s == "identity") return Activation::Identity;
    throw std::runtime_error("config: unknown activation '" + s + "'");
}

} // namespace

ExperimentConfig default_experiment_config() {
    ExperimentConfig cfg;
    cfg.model.raw_width = cfg.sbm_communities;
    cfg.model.hidden_width = 16;
    cfg.model.out_width = cfg.sbm_communities;
    cfg.model.coupling.kind = CouplingKind::GCN;
    cfg.model.coupling.feature_width = 16;
    cfg.model.coupling.num_layers = 20;
    cfg.model.integrator.dt = 1.0;
    cfg.model.integrator.alpha = 1.0;
    cfg.model.integrator.gamma = 1.0;
    cfg.model.integrator.n_layers = 20;
    cfg.model.integrator.activation = Activation::Tanh;
    cfg.model.task = Task::Classification;
    cfg.train.optimizer = OptimizerKind::Adam;
    cfg.train.learning_rate = 0.02;
    cfg.train.epochs = 150;
    cfg.train.patience = 30;
    return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j = json::parse(json_text);
    ExperimentConfig cfg = default_experiment_config();
    reject_unknown(j, {"seed", "dataset", "model", "integrator", "coupling", "train"}, "root");
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("dataset")) {
        const json& d = j["dataset"];
        reject_unknown(d, {"edges", "features", "labels", "splits", "synthetic"}, "dataset");
        if (d.contains("synthetic")) {
            const json& s = d["synthetic"];
            reject_unknown(s, {"nodes", "communities", "p_in", "p_out"}, "dataset.synthetic");
            cfg.synthetic = true;
            cfg.sbm_nodes = s.value("nodes", cfg.sbm_nodes);
            cfg.sbm_communities = s.value("communities", cfg.sbm_communities);
            cfg.sbm_p_in = s.value("p_in", cfg.sbm_p_in);
            cfg.sbm_p_out = s.value("p_out", cfg.sbm_p_out);
        } else {
            cfg.synthetic = false;
            cfg.edge_path = d.at("edges").get<std::string>();
            cfg.feature_path = d.at("features").get<std::string>();
            if (d.contains("labels")) cfg.label_path = d["labels"].get<std::string>();
            if (d.contains("splits")) cfg.split_path = d["splits"].get<std::string>();
        }
    }
    if (j.contains("coupling")) {
        const json& c = j["coupling"];
        reject_unknown(c, {"kind", "hidden", "share_weights", "leaky_slope", "adjacency"},
                       "coupling");
        const std::string kind = c.value("kind", "gcn");
        if (kind == "gcn") cfg.model.coupling.kind = CouplingKind::GCN;
        else if (kind == "gat") cfg.model.coupling.kind = CouplingKind::GAT;
        else throw std::runtime_error("config: unknown coupling kind '" + kind + "'");
        cfg.model.hidden_width = c.value("hidden", cfg.model.hidden_width);
        cfg.model.coupling.share_weights = c.value("share_weights", false);
        cfg.model.coupling.leaky_slope = c.value("leaky_slope", 0.2);
        const std::string adjk = c.value("adjacency", "sym_gcn");
        if (adjk == "sym_gcn") cfg.model.coupling.adjacency = AdjacencyKind::SymGCN;
        else if (adjk == "row_stochastic") cfg.model.coupling.adjacency = AdjacencyKind::RowStochastic;
        else throw std::runtime_error("config: unknown adjacency '" + adjk + "'");
    }
    if (j.contains("integrator")) {
        const json& i = j["integrator"];
        reject_unknown(i, {"dt", "alpha", "gamma", "layers", "activation", "y0", "graphcon"},
                       "integrator");
        cfg.model.integrator.dt = i.value("dt", 1.0);
        cfg.model.integrator.alpha = i.value("alpha", 1.0);
        cfg.model.integrator.gamma = i.value("gamma", 1.0);
        cfg.model.integrator.n_layers = i.value("layers", 20);
        cfg.model.integrator.activation = parse_activation(i.value("activation", "tanh"));
        const std::string y0 = i.value("y0", "copy_x0");
        if (y0 == "copy_x0") cfg.model.integrator.y0_mode = Y0Mode::CopyX0;
        else if (y0 == "zero") cfg.model.integrator.y0_mode = Y0Mode::Zero;
        else throw std::runtime_error("config: unknown y0 mode '" + y0 + "'");
        cfg.model.use_graphcon = i.value("graphcon", true);
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        reject_unknown(t, {"optimizer", "lr", "beta1", "beta2", "eps", "momentum", "epochs",
                           "patience"},
                       "train");
        const std::string opt = t.value("optimizer", "adam");
        if (opt == "adam") cfg.train.optimizer = OptimizerKind::Adam;
        else if (opt == "sgd_momentum") cfg.train.optimizer = OptimizerKind::SgdMomentum;
        else throw std::runtime_error("config: unknown optimizer '" + opt + "'");
        cfg.train.learning_rate = t.value("lr", cfg.train.learning_rate);
        cfg.train.beta1 = t.value("beta1", 0.9);
        cfg.train.beta2 = t.value("beta2", 0.999);
        cfg.train.eps = t.value("eps", 1e-8);
        cfg.train.momentum = t.value("momentum", 0.9);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.patience = t.value("patience", cfg.train.patience);
    }
    cfg.model.coupling.feature_width = cfg.model.hidden_width;
    cfg.model.coupling.num_layers = cfg.model.integrator.n_layers;
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

Dataset materialize_dataset(const ExperimentConfig& cfg) {
    if (cfg.synthetic)
        return gen_sbm(cfg.sbm_nodes, cfg.sbm_communities, cfg.sbm_p_in, cfg.sbm_p_out, cfg.seed);
    Dataset ds = load_dataset(*cfg.edge_path, *cfg.feature_path, cfg.label_path, cfg.split_path);
    if (!ds.splits) ds.splits = make_splits(ds.graph.num_nodes(), cfg.seed);
    return ds;
}

} // namespace graphcon
