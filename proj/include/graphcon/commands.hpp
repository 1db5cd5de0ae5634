#pragma once

#include <map>
#include <string>
#include <vector>

#include "graphcon/diagnostics.hpp"
#include "graphcon/io.hpp"

namespace graphcon {

// ---------------------------------------------------------------------------
// Fig.-2 style Dirichlet-energy experiment: 10x10 grid, 100 layers, width 64,
// U([0,1]) features, shared random weights. Baselines (stacked GCN/GAT) run
// ReLU; GraphCON runs tanh with alpha in {0, 0.5}, gamma = 1, dt = 1.
// ---------------------------------------------------------------------------

struct EnergyProfileEntry {
    std::string model;  // gcn | gat | graphcon_gcn | graphcon_gat
    double alpha = 0.0;
    double gamma = 1.0;
    EnergyReport report;
};

std::vector<EnergyProfileEntry> run_energy_models(std::uint64_t seed);

// Writes energy_profile.csv: layer,model,alpha,gamma,energy (600 data rows).
void cmd_energy_profile(std::uint64_t seed, const std::string& out_dir,
                        bool dump_trajectories = false);

// ---------------------------------------------------------------------------
// Verification checks (exit status of cmd_checks is nonzero iff any fails).
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    double observed = 0.0;
    double bound = 0.0;      // quantity the observation is compared against
    double tolerance = 0.0;  // pass threshold on observed (vs bound where applicable)
    std::string detail;
};

CheckResult check_conservation(std::uint64_t seed);
CheckResult check_jacobian(std::uint64_t seed);
CheckResult check_gradient_bound(std::uint64_t seed);
CheckResult check_leading_order(std::uint64_t seed);
CheckResult check_perturbation_identity(std::uint64_t seed);
CheckResult check_hidden_state_bound(std::uint64_t seed);

extern const std::vector<std::string> kAllCheckNames;

std::vector<CheckResult> run_checks(const std::vector<std::string>& which, std::uint64_t seed);
int cmd_checks(const std::vector<std::string>& which, std::uint64_t seed,
               const std::string& out_dir);

// ---------------------------------------------------------------------------
// Training commands
// ---------------------------------------------------------------------------

int cmd_train(const ExperimentConfig& cfg, const std::string& out_dir);

struct DepthSweepRow {
    std::string model;
    std::size_t layers = 0;
    double test_accuracy = 0.0;
};

std::vector<DepthSweepRow> run_depth_sweep(std::uint64_t seed, unsigned jobs);
int cmd_depth_sweep(std::uint64_t seed, const std::string& out_dir, unsigned jobs);

struct SensitivityRow {
    std::string sweep;  // "alpha" or "gamma"
    double value = 0.0;
    double test_accuracy = 0.0;
};

std::vector<SensitivityRow> run_sensitivity_sweep(std::uint64_t seed, unsigned jobs);
int cmd_sensitivity_sweep(std::uint64_t seed, const std::string& out_dir, unsigned jobs);

} // namespace graphcon
