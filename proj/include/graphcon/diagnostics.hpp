#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "graphcon/dynamics.hpp"
#include "graphcon/graph.hpp"
#include "graphcon/tape.hpp"

namespace graphcon {

// ---------------------------------------------------------------------------
// Dirichlet-energy profiles and the oversmoothing decision rule
// ---------------------------------------------------------------------------

struct EnergyReport {
    std::vector<double> energies;  // E(X^n) for n = 0..N
    double slope = 0.0;            // least-squares slope of ln E over n in [N/2, N]
    double terminal_ratio = 0.0;   // E(X^N) / E(X^0)
    bool degenerate = false;       // all window energies below 1e-300
    bool oversmoothing = false;
};

// Classification thresholds are artifact decisions: Definition-1 style decay
// is declared when slope <= -0.05 and E(X^N)/E(X^0) <= 1e-4.
inline constexpr double kOversmoothSlope = -0.05;
inline constexpr double kOversmoothRatio = 1e-4;

EnergyReport dirichlet_profile(const std::vector<Matrix>& layer_states, const Graph& g);
EnergyReport dirichlet_profile(const Trajectory& traj, const Graph& g);

// Least-squares slope of ln(values) vs t = index * dt (skips values < 1e-300).
double fit_log_slope(const std::vector<double>& values, double dt, std::size_t first = 0);

// E = sum_i ||Y_i||^2 + sum_i sum_{j in N_i} A_ij ||X_i - X_j||^2
// (self-loop entries contribute zero and are skipped).
double energy_functional(const Matrix& x, const Matrix& y, const NormalizedAdjacency& adj);

// First integral of the linear symmetric undamped system
//   Y' = A X - X, X' = Y  (A symmetric, rows summing to 1):
//   2 sum_i ||Y_i||^2 + sum_i sum_{j in N_i} A_ij ||X_i - X_j||^2.
// The velocity term carries the factor 2; without it the quantity oscillates
// at O(1) amplitude instead of being conserved.
double conserved_oscillator_energy(const Matrix& x, const Matrix& y,
                                   const NormalizedAdjacency& adj);

// ---------------------------------------------------------------------------
// Scalar per-node-weight GraphCON-GCN (alpha = gamma = 1, m = 1):
//   C^{n-1}_i = w^n_i X^{n-1}_i / d_i + sum_{j in N_i} w^n_j X^{n-1}_j / sqrt(d_i d_j)
//   Y^n = (1 - dt) Y^{n-1} + dt sigma(C^{n-1}) - dt X^{n-1}
//   X^n = X^{n-1} + dt Y^n
// with d = degrees after self-loop insertion (the GCN normalization convention).
// ---------------------------------------------------------------------------

struct ScalarGconModel {
    Graph graph;
    NormalizedAdjacency adj;        // SymGCN over graph
    std::vector<Matrix> weights;    // N entries, each v x 1
    double dt = 0.1;
    Activation activation = Activation::Tanh;
    Matrix target;                  // v x 1 ground truth

    std::size_t layers() const { return weights.size(); }
    std::size_t nodes() const { return graph.num_nodes(); }

    static ScalarGconModel random(const Graph& g, std::size_t n_layers, double dt,
                                  std::uint64_t seed, double weight_scale = 1.0,
                                  Activation act = Activation::Tanh);
};

struct ScalarRollout {
    std::unique_ptr<Tape> tape;
    std::vector<Var> w;       // N weight leaves
    std::vector<Var> x, y;    // N+1 states
    std::vector<Matrix> c;    // N cached pre-activations C^{n-1}
    Var loss;                 // J = (1/2v) sum (X^N - target)^2

    Matrix weight_grads() const;  // N x v matrix of dJ/dw after backward
};

ScalarRollout scalar_forward(const ScalarGconModel& model, const Matrix& x0, const Matrix& y0);

// Exact single-layer Jacobian dZ^n/dZ^{n-1} = I + dt E + dt^2 F in the
// interleaved ordering Z = [X_1, Y_1, ..., X_v, Y_v]; layer is 1-based and the
// cached C^{layer-1} comes from a rollout.
Matrix layer_jacobian_exact(const ScalarGconModel& model, std::size_t layer, const Matrix& c_cache);

// Full dZ^N/dZ^0 via repeated seeded reverse sweeps on the rollout's tape.
Matrix tape_jacobian(const ScalarGconModel& model, ScalarRollout& roll);

// Full dZ^N/dZ^0 by central finite differences on Z^0 (independent oracle).
Matrix fd_jacobian(const ScalarGconModel& model, const Matrix& x0, const Matrix& y0, double h);

// ---------------------------------------------------------------------------
// Gradient bound (tanh only: beta = beta' = 1) and leading-order gradient
// ---------------------------------------------------------------------------

struct GradientBoundReport {
    double max_abs_grad = 0.0;
    double bound_rhs = 0.0;
    double gamma_const = 0.0;  // the Gamma of the bound
    bool pass = false;
};

// Throws std::invalid_argument when the activation is not tanh or when the
// step-size precondition (1 + Gamma dt / 2)^{N-l} <= 1 + (N-l) Gamma dt fails
// for some layer (refuses to certify).
GradientBoundReport gradient_bound_check(const ScalarGconModel& model, const Matrix& x0,
                                         const Matrix& y0);

double bound_gamma_const(const ScalarGconModel& model);
bool step_size_precondition_holds(double gamma_const, double dt, std::size_t n_layers);

// Leading-order gradient of J w.r.t. w^l_k (l 1-based):
//   (N - l + 1) dt^2 / v * sum_{j in N_k u {k}} sigma'(C^{l-1}_j) Ahat_jk X^{l-1}_k (X^N_j - Xbar_j)
// The remainder is O(dt^3).
double leading_order_gradient(const ScalarGconModel& model, const ScalarRollout& roll,
                              std::size_t layer, std::uint32_t node);

// ---------------------------------------------------------------------------
// Hidden-state bound:  ||X^n_i||^2 <= ||X^0_i||^2 + ||Y^0_i||^2 / gamma
//                       + m beta^2 t_n / (2 gamma (alpha - gamma dt))
// Requires dt < min(alpha/gamma, 1/alpha) and a bounded activation.
// ---------------------------------------------------------------------------

struct HiddenStateBoundReport {
    std::size_t violations = 0;
    std::size_t first_layer = 0;
    std::uint32_t first_node = 0;
    bool pass = true;
};

HiddenStateBoundReport hidden_state_bound_check(const std::vector<Matrix>& xs,
                                                const std::vector<Matrix>& ys,
                                                const IntegratorConfig& cfg, double beta);

// ---------------------------------------------------------------------------
// Perturbation-energy identity for the linearized system. The balance tested:
//   E(t) = T1 + T2 + T3 with
//   E(t)  = (1/v) [ sum_i ||Yh_i||^2 + sum_i sum_j (A_ij + A_ji)/4 ||Xh_j - Xh_i||^2 ]
//   T1    = E(0) e^{-2 alpha t}
//   T2    = (alpha/v) sum_i sum_j (A_ij + A_ji)/2 * int_0^t ||Xh_j - Xh_i||^2 e^{2a(s-t)} ds
//   T3    = (1/v) sum_i sum_j (A_ij - A_ji)/2 * int_0^t (Yh_i + Yh_j)^T (Xh_j - Xh_i) e^{2a(s-t)} ds
// Integrals by the trapezoid rule on the RK4 grid.
// ---------------------------------------------------------------------------

struct PerturbationIdentityReport {
    double max_rel_residual = 0.0;
    double energy_initial = 0.0;
    double energy_final = 0.0;
};

PerturbationIdentityReport perturbation_identity_check(const NormalizedAdjacency& ahat,
                                                       double alpha, const Matrix& xh0,
                                                       const Matrix& yh0, double t_end,
                                                       double dt_fine);

// ---------------------------------------------------------------------------
// Depth sweep of layer-1 cotangent norms: GraphCON (scalar coupling, mse loss)
// vs a contractive stacked GCN baseline.
// ---------------------------------------------------------------------------

struct DepthGradientRow {
    std::string model;
    std::size_t depth = 0;
    double layer1_max = 0.0;
    double layer1_min_nonzero = 0.0;
};

enum class DepthDtMode { Fixed, OneOverN };

std::vector<DepthGradientRow> depth_gradient_sweep(const Graph& g,
                                                   const std::vector<std::size_t>& depths,
                                                   DepthDtMode mode, double fixed_dt,
                                                   std::uint64_t seed);

} // namespace graphcon
