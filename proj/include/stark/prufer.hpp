#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "stark/potential.hpp"

namespace stark {

struct PruferState {
    double xi;
    double theta;  // unwrapped phase, never reduced mod pi
    double logR;
};

/// Same state in the modified variables, with the local frequency factor
/// s(xi) = sqrt(1 - H_alpha(xi,E)).
struct ModifiedPruferState {
    PruferState base;
    double s;
};

/// Path of one phase/amplitude solve. Nodes are the accepted integrator steps
/// (phase spacing capped well below pi/2) plus paired nodes hugging every sign
/// switch, so cubic Hermite models built on (theta, dtheta) stay one-sided.
struct PruferTrajectory {
    double energy = 0.0;
    StarkFrame frame{1.0};
    bool flat = false;      // unit-frequency x-domain system, weight == 1
    bool modified = false;  // modified phase variables
    double tol = 0.0;
    double theta0 = 0.0;  // boundary phase at the first node

    std::vector<double> xi, theta, logR, dtheta, dlogR;
    std::vector<std::size_t> events;  // node indices of detected sign switches

    std::size_t size() const { return xi.size(); }
    PruferState state(std::size_t i) const { return {xi[i], theta[i], logR[i]}; }
    ModifiedPruferState modified_state(std::size_t i) const {
        return {state(i), frame_factor(xi[i])};
    }
    PruferState front() const { return state(0); }
    PruferState back() const { return state(size() - 1); }

    /// sqrt(1 + E p(xi)) in the modified frame, 1 otherwise.
    double frame_factor(double x) const;

    void append(double x, double th, double lr, double dth, double dlr);
    /// Concatenates a continuation run; drops its duplicated first node.
    void extend(const PruferTrajectory& tail);
    void validate() const;

    void save(std::ostream& os) const;
    void save_file(const std::string& path) const;
};

/// Solves d theta/d xi = 1 - Q sin^2 theta, d logR/d xi = (1/2) Q sin 2 theta
/// on [xi0, xi1] with per-step tolerance tol.
PruferTrajectory integrate(const EffectivePotential& Q, double xi0, double xi1,
                           double theta0, double logR0, double tol);

/// Same solve in the modified variables: the energy term is absorbed into the
/// local frequency s = sqrt(1 - H_alpha) and the exact frequency-derivative
/// terms are kept. Requires 1 - H_alpha > 0 on the whole range.
PruferTrajectory integrate_modified(const EffectivePotential& Q, double xi0, double xi1,
                                    double theta0, double logR0, double tol);

/// V(xi) = -(2 d(xi)/xi) sgn(sin 2 theta): piecewise-smooth, switch points
/// located by event detection.
struct SgnCoupling {
    std::function<double(double)> d;
};

/// V(xi) = -(4 M / (1 + xi - b)) sin 2 theta: smooth resonant coupling.
struct SinCoupling {
    double M = 0.0;
    double b = 0.0;
};

using CouplingMode = std::variant<SgnCoupling, SinCoupling>;

struct CoupledOptions {
    double logR0 = 0.0;
    double tol = 1e-9;
    bool flat = false;      // drop frame terms (plain -u'' + Vu = u in x)
    bool modified = false;  // integrate in the modified variables
};

struct CoupledRun {
    PruferTrajectory traj;
    GridFunction V;
};

/// Closes the loop: V is fed back from the phase while the phase evolves in
/// the potential it generates. Returns the trajectory and the realized V.
CoupledRun integrate_sign_coupled(double E, const CouplingMode& mode, const StarkFrame& frame,
                                  double xi0, double xi1, double theta0,
                                  const CoupledOptions& opts = {});

/// phi(xi) = exp(logR) sin(theta) / s(xi) sampled on the trajectory nodes.
GridFunction reconstruct_phi(const PruferTrajectory& traj);

}  // namespace stark
