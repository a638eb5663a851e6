#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "stark/potential.hpp"

namespace stark {

/// Direct integration of -u'' - x^alpha u + q u = E u as a first-order system
/// in the physical variable, with log-amplitude renormalization so growing
/// regimes never overflow. Node i stores u, u' in the scale exp(logscale[i]).
struct ShootingSolution {
    StarkFrame frame{1.0};
    double energy = 0.0;
    double theta_bc = 0.0;
    double tol = 0.0;

    std::vector<double> x, u, du, logscale;

    std::size_t size() const { return x.size(); }

    /// Scaled Hermite evaluation: returns (value, logscale) with
    /// u(at) = value * exp(logscale).
    std::pair<double, double> eval_scaled(double at) const;
    std::pair<double, double> eval_deriv_scaled(double at) const;
    /// Convenience for modest dynamic ranges.
    double eval(double at) const;

    void save(std::ostream& os) const;
    void save_file(const std::string& path) const;
};

/// Shoots from x0 with u(x0) = cos(theta_bc), u'(x0) = sin(theta_bc), i.e.
/// u'(x0)/u(x0) = tan(theta_bc). Pass q = nullptr for the bare operator.
ShootingSolution shoot(const GridFunction* q, double E, const StarkFrame& frame, double x0,
                       double x1, double theta_bc, double tol);

/// Initial-value variant with explicit boundary data.
ShootingSolution shoot_iv(const GridFunction* q, double E, const StarkFrame& frame, double x0,
                          double x1, double u0, double du0, double tol);

/// Zeros of u on [lo, hi], located on the stored nodes by sign change and
/// refined on the Hermite model.
std::vector<double> solution_zeros(const ShootingSolution& sol, double lo, double hi);

/// Sup deviation between two sampled solution shapes after single-point
/// normalization, relative to the first shape's sup. Identical inputs give 0.
/// When the preferred normalization node has a vanishing value the next
/// usable node is taken.
double compare_shapes(const std::vector<double>& phi1, const std::vector<double>& phi2);

/// Transports the shooting solution into the transformed frame through
/// phi = x^{alpha/4} u and compares it pointwise with the phase-equation
/// reconstruction on [xi_lo, xi_hi]; returns the sup relative deviation.
double cross_validate(const GridFunction* q, double E, const StarkFrame& frame, double xi_lo,
                      double xi_hi, double theta0, double tol);

/// Decaying solution of -y'' + qtilde y = 0 toward -infinity: integrates from
/// far out in the forbidden region so the wanted mode dominates, retrying
/// from farther away (up to 3 times) if the log-slope dips below M. Returns
/// ln|y| sampled on [x_start - 4|x_start|, x_start].
GridFunction negative_tail_solution(const std::function<double(double)>& qtilde, double M,
                                    double x_start);

}  // namespace stark
