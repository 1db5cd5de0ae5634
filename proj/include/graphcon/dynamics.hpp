#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "graphcon/coupling.hpp"
#include "graphcon/graph.hpp"
#include "graphcon/tape.hpp"

namespace graphcon {

enum class Y0Mode { CopyX0, Zero };

struct IntegratorConfig {
    double dt = 1.0;        // > 0
    double alpha = 1.0;     // >= 0
    double gamma = 1.0;     // > 0
    std::size_t n_layers = 1;
    Activation activation = Activation::Relu;
    Y0Mode y0_mode = Y0Mode::CopyX0;

    void validate() const;
};

// Per-layer states (X^n, Y^n) for n = 0..N, on the tape that produced them.
struct Trajectory {
    std::vector<Var> x;   // length N+1
    std::vector<Var> y;   // length N+1; empty for baseline rollouts
    IntegratorConfig config;

    std::size_t layers() const { return x.empty() ? 0 : x.size() - 1; }
    bool has_velocity() const { return !y.empty(); }
};

// Damped symplectic-Euler IMEX rollout:
//   Y^n = Y^{n-1} + dt [sigma(F(X^{n-1})) - gamma X^{n-1} - alpha Y^{n-1}]
//   X^n = X^{n-1} + dt Y^n
// Y first, X uses the new Y. Aborts with the layer index on nonfinite values.
Trajectory graphcon_forward(Tape& tape, Var x0, Var y0, const CouplingConfig& ccfg,
                            const CouplingVars& cvars, const Graph& g,
                            const NormalizedAdjacency& adj, const IntegratorConfig& cfg);

// Stacked-GNN recursion X^n = (dt/gamma) sigma(F(X^{n-1})).
Trajectory baseline_forward(Tape& tape, Var x0, const CouplingConfig& ccfg,
                            const CouplingVars& cvars, const Graph& g,
                            const NormalizedAdjacency& adj, const IntegratorConfig& cfg);

// Uncoupled unit oscillator: X(t) = X0 cos t + Y0 sin t, Y(t) = -X0 sin t + Y0 cos t.
std::pair<Matrix, Matrix> closed_form_uncoupled(const Matrix& x0, const Matrix& y0, double t);

// Plain (tape-free) state trajectory, used by the reference integrators.
struct DenseTrajectory {
    std::vector<Matrix> x;
    std::vector<Matrix> y;
    double dt = 0.0;
};

// Classical RK4 on the first-order system
//   X' = Y, Y' = sigma(coupling(X)) - gamma X - alpha Y.
// coupling == nullptr means F == 0. High-order oracle for continuous claims.
DenseTrajectory reference_rk4_forward(const Matrix& x0, const Matrix& y0,
                                      const NormalizedAdjacency* coupling, Activation act,
                                      double alpha, double gamma, double dt_fine, double t_end);

// Linearized perturbation system around a constant steady state:
//   Xh' = Yh, Yh' = Ahat Xh - Xh - alpha Yh   (Ahat row-stochastic).
DenseTrajectory linearized_perturbation_forward(const Matrix& xh0, const Matrix& yh0,
                                                const NormalizedAdjacency& ahat, double alpha,
                                                double dt_fine, double t_end);

} // namespace graphcon
