#include "stark/frame.hpp"

#include <cmath>
#include <stdexcept>

namespace stark {

StarkFrame::StarkFrame(double alpha_exponent) : alpha(alpha_exponent) {
    if (!(alpha > 0.0) || !(alpha < 2.0))
        throw std::invalid_argument("StarkFrame: alpha must lie in (0,2)");
    const double half = 1.0 + 0.5 * alpha;
    c_alpha = std::pow(half, 2.0 / (2.0 + alpha));
    c_pow_alpha = std::pow(half, 2.0 * alpha / (2.0 + alpha));
    weight_exp = 2.0 * alpha / (2.0 + alpha);
    const double s = 2.0 + alpha;
    curvature = -alpha * (alpha + 4.0) / (4.0 * s * s);
}

double xi_of_x(double x, const StarkFrame& frame) {
    if (x < 0.0) throw std::domain_error("xi_of_x: x must be nonnegative");
    const double e = 1.0 + 0.5 * frame.alpha;
    return std::pow(x, e) / e;
}

double x_of_xi(double xi, const StarkFrame& frame) {
    if (xi < 0.0) throw std::domain_error("x_of_xi: xi must be nonnegative");
    return frame.c_alpha * std::pow(xi, 2.0 / (2.0 + frame.alpha));
}

double weight_p(double xi, const StarkFrame& frame) {
    if (!(xi > 0.0)) throw std::domain_error("weight_p: xi must be positive");
    return std::pow(xi, -frame.weight_exp) / frame.c_pow_alpha;
}

double critical_coupling(const StarkFrame& frame) {
    return 0.25 * M_PI * (2.0 - frame.alpha) / (2.0 + frame.alpha);
}

}  // namespace stark
