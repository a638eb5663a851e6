#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stark/prufer.hpp"

namespace stark {

/// Cubic Hermite dense model over a trajectory's stored nodes. The stored
/// derivatives are one-sided at switch points (paired nodes), so every
/// inter-node interval is a smooth piece.
class TrajectoryModel {
public:
    explicit TrajectoryModel(const PruferTrajectory& t);

    double theta(double xi) const { return eval(t_->theta, t_->dtheta, xi); }
    double logR(double xi) const { return eval(t_->logR, t_->dlogR, xi); }

    const PruferTrajectory& trajectory() const { return *t_; }
    double front() const { return t_->xi.front(); }
    double back() const { return t_->xi.back(); }
    std::size_t size() const { return t_->size(); }
    double node(std::size_t i) const { return t_->xi[i]; }

    /// Zeros of sin 2 theta (phase crossing a multiple of pi/2) inside (a,b).
    void kinks(double a, double b, std::vector<double>& out) const;

private:
    std::size_t locate(double xi) const;
    double eval(const std::vector<double>& v, const std::vector<double>& dv, double xi) const;

    const PruferTrajectory* t_;
    mutable std::size_t hint_ = 0;
};

struct QuadOptions {
    double rel_tol = 1e-11;
    int extra_refine = 0;  // forced extra bisection depth (refinement checks)
};

namespace detail {

// 7-point Gauss-Legendre rule; degree-13 exactness makes single cells of
// sub-pi width converge essentially in one shot for phase-law integrands.
inline constexpr double kGl7X[7] = {0.0,
                                    -0.4058451513773972, 0.4058451513773972,
                                    -0.7415311855993945, 0.7415311855993945,
                                    -0.9491079123427585, 0.9491079123427585};
inline constexpr double kGl7W[7] = {0.4179591836734694,
                                    0.3818300505051189, 0.3818300505051189,
                                    0.2797053914892766, 0.2797053914892766,
                                    0.1294849661688697, 0.1294849661688697};

template <class F>
double gl7(F& f, double a, double b, double* scale) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 7; ++i) {
        const double v = f(c + h * kGl7X[i]);
        if (scale) *scale = std::max(*scale, std::abs(v));
        s += kGl7W[i] * v;
    }
    return s * h;
}

template <class F>
double gauss_recurse(F& f, double a, double b, double coarse, double tol, int depth,
                     int force) {
    const double m = 0.5 * (a + b);
    const double left = gl7(f, a, m, nullptr);
    const double right = gl7(f, m, b, nullptr);
    const double fine = left + right;
    if (force <= 0 && (std::abs(fine - coarse) <= tol || depth >= 24)) return fine;
    return gauss_recurse(f, a, m, left, 0.5 * tol, depth + 1, force - 1) +
           gauss_recurse(f, m, b, right, 0.5 * tol, depth + 1, force - 1);
}

template <class F>
double gauss_cell(F&& f, double a, double b, double rel_tol, int force) {
    if (!(b > a)) return 0.0;
    double scale = 1e-300;
    const double coarse = gl7(f, a, b, &scale);
    const double tol = rel_tol * scale * (b - a);
    return gauss_recurse(f, a, b, coarse, tol, 0, force);
}

void merged_breakpoints(const std::vector<const TrajectoryModel*>& models,
                        const std::vector<const GridFunction*>& grids, double a, double b,
                        std::vector<double>& out);

}  // namespace detail

/// Adaptive quadrature of f over [a,b], split at every node of the given
/// models/grids and at every sin 2 theta zero of the kink models, so each cell
/// sees a smooth integrand.
template <class F>
double integrate_adaptive(const std::vector<const TrajectoryModel*>& models,
                          const std::vector<const GridFunction*>& grids,
                          const std::vector<const TrajectoryModel*>& kink_models, double a,
                          double b, F&& f, const QuadOptions& opts = {}) {
    if (!(b > a)) return 0.0;
    std::vector<double> breaks;
    detail::merged_breakpoints(models, grids, a, b, breaks);
    std::vector<double> kk;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double lo = breaks[i];
        const double hi = breaks[i + 1];
        kk.clear();
        for (const TrajectoryModel* m : kink_models) m->kinks(lo, hi, kk);
        std::sort(kk.begin(), kk.end());
        for (double k : kk) {
            if (k > lo && k < hi) {
                total += detail::gauss_cell(f, lo, k, opts.rel_tol, opts.extra_refine);
                lo = k;
            }
        }
        total += detail::gauss_cell(f, lo, hi, opts.rel_tol, opts.extra_refine);
    }
    return total;
}

/// Weighted inner product of sampled functions: integral f g (1+xi) d xi.
double inner_product_weighted(const GridFunction& f, const GridFunction& g, double lo,
                              double hi);
/// Plain integral of f^2 (1+xi) d xi.
double norm2_weighted(const GridFunction& f, double lo, double hi);

// ---------------------------------------------------------------------------

enum class OscKind { Sin, Cos, AbsSin2 };

struct OscillatoryReport {
    double a = 0, b = 0;
    double beta1 = 0, beta2 = 0;  // measured phase-law exponent; weight exponent
    double value = 0;             // the integral over [a,b]
    double density = 0;           // value / ln(b/a), AbsSin2 kind
    double gamma = 0;             // measured limiting phase velocity
    bool applicable = true;       // false when the phase law is degenerate
    double envelope_C = 0, envelope_exponent = 0;
    double required_exponent = 0;
    bool envelope_ok = true;
};

/// Quadrature of integral kind(theta)/xi^beta2 over [a,b] along the
/// trajectory; for Sin/Cos kinds sweeps the lower endpoint across decades and
/// fits the envelope exponent of |I(a)| <= C / a^beta.
OscillatoryReport oscillatory_integral(const PruferTrajectory& traj, double beta2, double a,
                                       double b, OscKind kind);

struct GramReport {
    double B = 0;
    std::vector<double> energies;
    std::vector<double> A;                     // normalization integrals
    std::vector<std::vector<double>> inner;    // normalized <e_i, e_k>
    double max_offdiag = 0;
};

/// Gram data of the vectors sin 2 theta_i/(1+xi) normalized in
/// L^2([1,B],(1+xi) d xi). All trajectories must share the potential.
GramReport gram_matrix(const std::vector<const PruferTrajectory*>& trajs, double B);

struct OrthogonalityReport {
    double value = 0;           // integral over [xi0, Xi]
    double fitted_exponent = 0; // decay exponent of |I(xi0)| across the sweep
    double fitted_C = 0;
    bool exponent_ok = true;    // fitted exponent >= 1/3 - 0.1
};

OrthogonalityReport almost_orthogonality(const PruferTrajectory& t1, const PruferTrajectory& t2,
                                         double xi0, double Xi);

struct BesselCheck {
    double lhs = 0, rhs = 0;
    double alpha = 0;  // N max_{j != k} |<e_j, e_k>|
    bool hypothesis_ok = true;
};

/// Both sides of sum_i <g,e_i>^2 <= (1 + alpha) ||g||^2 for sampled frames.
BesselCheck bessel_bound_check(const GridFunction& g, const std::vector<GridFunction>& frames,
                               double B);
/// Same bound with the frame vectors taken from trajectories (via gram data).
BesselCheck bessel_bound_check(const GridFunction& g, const GramReport& gram,
                               const std::vector<const PruferTrajectory*>& trajs);

/// floor(2 a^2 / (2-alpha)^2): cap on the number of admissible energies at
/// envelope level a.
long count_bound(double a, const StarkFrame& frame);

struct DecayFit {
    double slope = 0;
    double ci = 0;  // half-spread of sub-window slopes
};

/// Least-squares slope of logR against ln xi on [lo,hi] (>= 2 decades).
DecayFit decay_exponent(const PruferTrajectory& traj, double lo, double hi);

enum class Verdict { Certified, Divergent, Inconclusive };
std::string verdict_name(Verdict v);

struct TailReport {
    std::vector<double> decade_lo;  // left edge of each decade
    std::vector<double> masses;     // integral R^2 p per decade
    std::vector<double> ratios;     // masses[k+1]/masses[k]
    Verdict verdict = Verdict::Inconclusive;
};

/// Per-decade mass of R^2 p along the trajectory with the classification
/// rule: geometric decrease of the final decades certifies square
/// summability, an equal-mass floor marks divergence.
TailReport l2_tail(const PruferTrajectory& traj);

/// integral of R^2 p over [a,b] along the trajectory (p == 1 in the flat frame).
double tail_mass(const PruferTrajectory& traj, double a, double b);

/// Geometric-decrease threshold used by the tail verdict.
inline constexpr double kGeomRatio = 0.93;

}  // namespace stark
