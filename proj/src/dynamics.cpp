#include "graphcon/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace graphcon {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) && dt != 0.0) throw std::invalid_argument("IntegratorConfig: dt must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("IntegratorConfig: gamma must be > 0");
    if (alpha < 0.0) throw std::invalid_argument("IntegratorConfig: alpha must be >= 0");
    // n_layers == 0 is the degenerate identity rollout (trajectory = initial state)
}

Trajectory graphcon_forward(Tape& tape, Var x0, Var y0, const CouplingConfig& ccfg,
                            const CouplingVars& cvars, const Graph& g,
                            const NormalizedAdjacency& adj, const IntegratorConfig& cfg) {
    cfg.validate();
    Trajectory traj;
    traj.config = cfg;
    Var x = x0, y = y0;
    traj.x.push_back(x);
    traj.y.push_back(y);
    for (std::size_t n = 0; n < cfg.n_layers; ++n) {
        Var f = apply_coupling(tape, ccfg, cvars, x, g, adj, n);
        Var sig = tape.activation(f, cfg.activation);
        Var rhs = tape.sub(tape.sub(sig, tape.scale(x, cfg.gamma)), tape.scale(y, cfg.alpha));
        y = tape.add(y, tape.scale(rhs, cfg.dt));
        x = tape.add(x, tape.scale(y, cfg.dt));
        if (!x.value().all_finite() || !y.value().all_finite())
            throw std::runtime_error("graphcon_forward: nonfinite state at layer " +
                                     std::to_string(n + 1));
        traj.x.push_back(x);
        traj.y.push_back(y);
    }
    return traj;
}

Trajectory baseline_forward(Tape& tape, Var x0, const CouplingConfig& ccfg,
                            const CouplingVars& cvars, const Graph& g,
                            const NormalizedAdjacency& adj, const IntegratorConfig& cfg) {
    cfg.validate();
    Trajectory traj;
    traj.config = cfg;
    Var x = x0;
    traj.x.push_back(x);
    const double scale = cfg.dt / cfg.gamma;
    for (std::size_t n = 0; n < cfg.n_layers; ++n) {
        Var f = apply_coupling(tape, ccfg, cvars, x, g, adj, n);
        x = tape.scale(tape.activation(f, cfg.activation), scale);
        if (!x.value().all_finite())
            throw std::runtime_error("baseline_forward: nonfinite state at layer " +
                                     std::to_string(n + 1));
        traj.x.push_back(x);
    }
    return traj;
}

std::pair<Matrix, Matrix> closed_form_uncoupled(const Matrix& x0, const Matrix& y0, double t) {
    if (!x0.same_shape(y0)) throw std::invalid_argument("closed_form_uncoupled: shape mismatch");
    const double c = std::cos(t), s = std::sin(t);
    Matrix x = x0, y = y0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = x0[i] * c + y0[i] * s;
        y[i] = -x0[i] * s + y0[i] * c;
    }
    return {x, y};
}

namespace {

Matrix apply_act(const Matrix& m, Activation act) {
    Matrix out = m;
    switch (act) {
        case Activation::Relu:
            for (std::size_t i = 0; i < out.size(); ++i)
                if (out[i] < 0.0) out[i] = 0.0;
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
            break;
        case Activation::Identity:
            break;
    }
    return out;
}

struct Rhs {
    const NormalizedAdjacency* coupling;
    Activation act;
    double alpha, gamma;

    void operator()(const Matrix& x, const Matrix& y, Matrix& dx, Matrix& dy) const {
        dx = y;
        if (coupling) {
            dy = apply_act(coupling->apply(x), act);
        } else {
            dy = Matrix(x.rows(), x.cols());
        }
        for (std::size_t i = 0; i < dy.size(); ++i) dy[i] -= gamma * x[i] + alpha * y[i];
    }
};

DenseTrajectory rk4_run(const Matrix& x0, const Matrix& y0, const Rhs& rhs, double dt,
                        double t_end) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4: dt must be > 0");
    const std::size_t steps = static_cast<std::size_t>(std::llround(t_end / dt));
    DenseTrajectory traj;
    traj.dt = dt;
    traj.x.reserve(steps + 1);
    traj.y.reserve(steps + 1);
    Matrix x = x0, y = y0;
    traj.x.push_back(x);
    traj.y.push_back(y);
    Matrix k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y, tx, ty;
    for (std::size_t s = 0; s < steps; ++s) {
        rhs(x, y, k1x, k1y);
        tx = x + (dt / 2.0) * k1x;
        ty = y + (dt / 2.0) * k1y;
        rhs(tx, ty, k2x, k2y);
        tx = x + (dt / 2.0) * k2x;
        ty = y + (dt / 2.0) * k2y;
        rhs(tx, ty, k3x, k3y);
        tx = x + dt * k3x;
        ty = y + dt * k3y;
        rhs(tx, ty, k4x, k4y);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            y[i] += dt / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }
        if (!x.all_finite() || !y.all_finite())
            throw std::runtime_error("rk4: nonfinite state at step " + std::to_string(s + 1));
        traj.x.push_back(x);
        traj.y.push_back(y);
    }
    return traj;
}

} // namespace

DenseTrajectory reference_rk4_forward(const Matrix& x0, const Matrix& y0,
                                      const NormalizedAdjacency* coupling, Activation act,
                                      double alpha, double gamma, double dt_fine, double t_end) {
    return rk4_run(x0, y0, Rhs{coupling, act, alpha, gamma}, dt_fine, t_end);
}

DenseTrajectory linearized_perturbation_forward(const Matrix& xh0, const Matrix& yh0,
                                                const NormalizedAdjacency& ahat, double alpha,
                                                double dt_fine, double t_end) {
    return rk4_run(xh0, yh0, Rhs{&ahat, Activation::Identity, alpha, 1.0}, dt_fine, t_end);
}

} // namespace graphcon
