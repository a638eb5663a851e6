#include "stark/potential.hpp"

#include <stdexcept>

namespace stark {

EffectivePotential::EffectivePotential(StarkFrame frame, double energy,
                                       std::shared_ptr<const GridFunction> V)
    : frame_(frame), energy_(energy), V_(std::move(V)), flat_(false) {}

EffectivePotential EffectivePotential::flat(std::shared_ptr<const GridFunction> V) {
    EffectivePotential q;
    q.V_ = std::move(V);
    return q;
}

double EffectivePotential::ambient(double xi) const {
    if (flat_) return 0.0;
    return frame_.curvature / (xi * xi) - energy_ * weight_p(xi, frame_);
}

double EffectivePotential::perturbation(double xi) const {
    return V_ ? (*V_)(xi) : 0.0;
}

EffectivePotential assemble_Q(std::shared_ptr<const GridFunction> V, double energy,
                              const StarkFrame& frame) {
    if (V && V->domain() != Domain::Xi)
        throw std::invalid_argument("assemble_Q: V must live in the xi domain");
    return EffectivePotential(frame, energy, std::move(V));
}

GridFunction q_from_V(const GridFunction& V, const StarkFrame& frame) {
    if (V.domain() != Domain::Xi)
        throw std::invalid_argument("q_from_V: input must live in the xi domain");
    std::vector<double> xs(V.size()), qs(V.size());
    for (std::size_t i = 0; i < V.size(); ++i) {
        const double xi = V.node(i);
        xs[i] = x_of_xi(xi, frame);
        qs[i] = V.value(i) / weight_p(xi, frame);
    }
    return GridFunction(std::move(xs), std::move(qs), V.interp(), Domain::X);
}

GridFunction V_from_q(const GridFunction& q, const StarkFrame& frame) {
    if (q.domain() != Domain::X)
        throw std::invalid_argument("V_from_q: input must live in the x domain");
    std::vector<double> xis(q.size()), vs(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double xi = xi_of_x(q.node(i), frame);
        xis[i] = xi;
        vs[i] = q.value(i) * weight_p(xi, frame);
    }
    return GridFunction(std::move(xis), std::move(vs), q.interp(), Domain::Xi);
}

}  // namespace stark
