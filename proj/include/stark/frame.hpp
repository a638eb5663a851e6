#pragma once

namespace stark {

/// Coordinate frame of the operator -D^2 - x^alpha + q for a fixed exponent.
///
/// Caches the constants of the change of variables
///   xi(x) = x^{1+alpha/2} / (1+alpha/2),    x(xi) = c_alpha xi^{2/(2+alpha)},
/// the weight p(xi) = 1/(c_alpha^alpha xi^{2alpha/(2+alpha)}) and the
/// xi^{-2} curvature coefficient of the transformed equation.
struct StarkFrame {
    double alpha;        // exponent, 0 < alpha < 2
    double c_alpha;      // (1+alpha/2)^{2/(2+alpha)}
    double c_pow_alpha;  // c_alpha^alpha
    double weight_exp;   // 2 alpha / (2+alpha)
    double curvature;    // -alpha(alpha+4) / (4 (2+alpha)^2), equals -5/36 at alpha=1

    explicit StarkFrame(double alpha_exponent);
};

/// xi(x) = integral_0^x t^{alpha/2} dt. Throws std::domain_error for x < 0.
double xi_of_x(double x, const StarkFrame& frame);

/// Inverse map x = c_alpha xi^{2/(2+alpha)}. Throws std::domain_error for xi < 0.
double x_of_xi(double xi, const StarkFrame& frame);

/// Weight p(xi), strictly decreasing in xi. Throws std::domain_error for xi <= 0.
double weight_p(double xi, const StarkFrame& frame);

/// Threshold coupling of the sign-coupled construction: (pi/4)(2-alpha)/(2+alpha).
/// Couplings above it yield square-summable amplitudes, below it none exist.
double critical_coupling(const StarkFrame& frame);

}  // namespace stark
