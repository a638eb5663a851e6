#pragma once

#include <memory>

#include "stark/frame.hpp"
#include "stark/grid_function.hpp"

namespace stark {

/// Effective potential of the transformed equation -phi'' + Q(xi,E) phi = phi,
///   Q(xi,E) = curvature/xi^2 - E p(xi) + V(xi),
/// where the curvature coefficient and the weight p come from the frame and V
/// is an optional sampled perturbation in the xi domain.
///
/// A "flat" variant drops the curvature and energy terms; it carries the plain
/// unit-frequency equation -u'' + V u = u used by x-domain constructions and
/// synthetic tests.
class EffectivePotential {
public:
    EffectivePotential(StarkFrame frame, double energy,
                       std::shared_ptr<const GridFunction> V);

    /// Flat background: Q = V (or 0), no frame terms.
    static EffectivePotential flat(std::shared_ptr<const GridFunction> V = nullptr);

    double operator()(double xi) const { return ambient(xi) + perturbation(xi); }

    /// Frame part of Q: curvature/xi^2 - E p(xi); zero for flat potentials.
    double ambient(double xi) const;
    /// V(xi) if a perturbation is attached, else 0.
    double perturbation(double xi) const;

    const StarkFrame& frame() const { return frame_; }
    double energy() const { return energy_; }
    bool is_flat() const { return flat_; }
    const GridFunction* V() const { return V_.get(); }

private:
    EffectivePotential() : frame_(1.0), energy_(0.0), flat_(true) {}

    StarkFrame frame_;
    double energy_;
    std::shared_ptr<const GridFunction> V_;
    bool flat_ = false;
};

/// Wraps V (xi domain, or null for the zero function) together with E and the
/// frame. Throws std::invalid_argument if V lives in the x domain.
EffectivePotential assemble_Q(std::shared_ptr<const GridFunction> V, double energy,
                              const StarkFrame& frame);

/// Dictionary between the two domains: q(x) = V(xi(x)) / p(xi(x)), mapped
/// node-by-node. Throws std::invalid_argument on a wrong-domain input.
GridFunction q_from_V(const GridFunction& V, const StarkFrame& frame);
GridFunction V_from_q(const GridFunction& q, const StarkFrame& frame);

}  // namespace stark
