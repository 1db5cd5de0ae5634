#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphcon/commands.hpp"
#include "graphcon/io.hpp"

using namespace graphcon;

int main(int argc, char** argv) {
    CLI::App app{"graphcon: graph-coupled oscillator networks"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string config_path;
    unsigned jobs = 1;

    auto add_common = [&](CLI::App* cmd, bool with_config = false) {
        cmd->add_option("--seed", seed, "master RNG seed");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--jobs", jobs, "parallel sweep cells");
        if (with_config) cmd->add_option("--config", config_path, "JSON experiment config");
    };

    // gen-grid
    auto* gen_grid = app.add_subcommand("gen-grid", "write a W x H grid graph edge list");
    std::uint32_t width = 10, height = 10;
    gen_grid->add_option("--width", width, "grid width")->required();
    gen_grid->add_option("--height", height, "grid height")->required();
    add_common(gen_grid);

    // gen-sbm
    auto* gen_sbm_cmd = app.add_subcommand("gen-sbm", "write a synthetic SBM dataset");
    std::uint32_t sbm_nodes = 200, sbm_comm = 2;
    double p_in = 0.10, p_out = 0.01;
    gen_sbm_cmd->add_option("--nodes", sbm_nodes, "number of nodes");
    gen_sbm_cmd->add_option("--communities", sbm_comm, "number of communities");
    gen_sbm_cmd->add_option("--p-in", p_in, "within-community edge probability");
    gen_sbm_cmd->add_option("--p-out", p_out, "across-community edge probability");
    add_common(gen_sbm_cmd);

    // energy-profile
    auto* energy = app.add_subcommand("energy-profile",
                                      "layer-wise Dirichlet energies for GCN/GAT and GraphCON");
    bool dump_traj = false;
    energy->add_flag("--dump-trajectory", dump_traj, "also write one GraphCON trajectory CSV");
    add_common(energy);

    // checks
    auto* checks = app.add_subcommand("checks", "run the verification checks");
    std::vector<std::string> which;
    checks->add_option("--which", which,
                       "subset of checks (default: all). Names: conserve-check, jacobian-check, "
                       "grad-bound-check, leading-order-check, perturbation-identity-check, "
                       "hidden-state-bound-check");
    add_common(checks);

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model per the experiment config");
    add_common(train_cmd, true);

    // depth-sweep
    auto* depth = app.add_subcommand("depth-sweep",
                                     "train GraphCON-GCN vs stacked GCN at N in {5,10,15,20}");
    add_common(depth);

    // sensitivity-sweep
    auto* sens = app.add_subcommand("sensitivity-sweep",
                                    "test accuracy over alpha and gamma grids");
    add_common(sens);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_grid->parsed()) {
            std::filesystem::create_directories(out_dir);
            write_edge_file(out_dir + "/grid_edges.tsv", Graph::grid(width, height));
            log_line(LogLevel::Info, "gen-grid: wrote " + out_dir + "/grid_edges.tsv");
            return 0;
        }
        if (gen_sbm_cmd->parsed()) {
            const Dataset ds = gen_sbm(sbm_nodes, sbm_comm, p_in, p_out, seed);
            save_dataset(out_dir, ds);
            log_line(LogLevel::Info, "gen-sbm: wrote dataset with " +
                                         std::to_string(ds.graph.num_undirected_edges()) +
                                         " edges to " + out_dir);
            return 0;
        }
        if (energy->parsed()) {
            cmd_energy_profile(seed, out_dir, dump_traj);
            return 0;
        }
        if (checks->parsed()) {
            if (which.empty()) which = kAllCheckNames;
            return cmd_checks(which, seed, out_dir);
        }
        if (train_cmd->parsed()) {
            ExperimentConfig cfg = config_path.empty() ? default_experiment_config()
                                                       : load_experiment_config(config_path);
            if (seed != 0) cfg.seed = seed;
            return cmd_train(cfg, out_dir);
        }
        if (depth->parsed()) return cmd_depth_sweep(seed, out_dir, jobs);
        if (sens->parsed()) return cmd_sensitivity_sweep(seed, out_dir, jobs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
