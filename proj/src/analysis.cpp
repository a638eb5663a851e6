#include "stark/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace stark {

// ---------------------------------------------------------------- model

TrajectoryModel::TrajectoryModel(const PruferTrajectory& t) : t_(&t) {
    if (t.size() < 2) throw std::invalid_argument("TrajectoryModel: need >= 2 nodes");
}

std::size_t TrajectoryModel::locate(double xi) const {
    const auto& g = t_->xi;
    if (!(xi >= g.front() && xi <= g.back()))
        throw std::domain_error("TrajectoryModel: evaluation outside range");
    std::size_t i = hint_;
    if (i + 1 >= g.size()) i = g.size() - 2;
    if (g[i] <= xi && xi <= g[i + 1]) return i;
    if (i + 2 < g.size() && g[i + 1] <= xi && xi <= g[i + 2]) {
        hint_ = i + 1;
        return hint_;
    }
    auto it = std::upper_bound(g.begin(), g.end(), xi);
    std::size_t j = static_cast<std::size_t>(it - g.begin());
    if (j > 0) --j;
    if (j + 1 >= g.size()) j = g.size() - 2;
    hint_ = j;
    return j;
}

double TrajectoryModel::eval(const std::vector<double>& v, const std::vector<double>& dv,
                             double xi) const {
    const std::size_t i = locate(xi);
    const double x0 = t_->xi[i], x1 = t_->xi[i + 1];
    const double h = x1 - x0;
    const double t = (xi - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v[i] + h * (t3 - 2 * t2 + t) * dv[i] +
           (-2 * t3 + 3 * t2) * v[i + 1] + h * (t3 - t2) * dv[i + 1];
}

void TrajectoryModel::kinks(double a, double b, std::vector<double>& out) const {
    const double ta = theta(a), tb = theta(b);
    const double lo = std::min(ta, tb), hi = std::max(ta, tb);
    const double half = M_PI_2;
    long k0 = static_cast<long>(std::floor(lo / half)) + 1;
    long k1 = static_cast<long>(std::floor(hi / half));
    if (hi / half == std::floor(hi / half)) --k1;  // endpoint exactly on a multiple
    for (long k = k0; k <= k1; ++k) {
        const double target = k * half;
        if (!(target > lo && target < hi)) continue;
        double xa = a, xb = b;
        double fa = ta - target;
        double fb = tb - target;
        if (fa == 0.0 || fb == 0.0 || fa * fb > 0.0) continue;
        for (int it = 0; it < 60 && (xb - xa) > std::abs(xb) * 1e-15; ++it) {
            const double xm = 0.5 * (xa + xb);
            const double fm = theta(xm) - target;
            if ((fm < 0.0) == (fa < 0.0)) {
                xa = xm;
                fa = fm;
            } else {
                xb = xm;
                fb = fm;
            }
        }
        out.push_back(0.5 * (xa + xb));
    }
}

namespace detail {

void merged_breakpoints(const std::vector<const TrajectoryModel*>& models,
                        const std::vector<const GridFunction*>& grids, double a, double b,
                        std::vector<double>& out) {
    out.clear();
    out.push_back(a);
    out.push_back(b);
    for (const TrajectoryModel* m : models) {
        const auto& g = m->trajectory().xi;
        auto lo = std::upper_bound(g.begin(), g.end(), a);
        auto hi = std::lower_bound(g.begin(), g.end(), b);
        out.insert(out.end(), lo, hi);
    }
    for (const GridFunction* gf : grids) {
        const auto& g = gf->grid();
        auto lo = std::upper_bound(g.begin(), g.end(), a);
        auto hi = std::lower_bound(g.begin(), g.end(), b);
        out.insert(out.end(), lo, hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace detail

// ---------------------------------------------------------------- helpers

namespace {

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y,
                 double* intercept = nullptr) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    if (intercept) *intercept = my - slope * mx;
    return slope;
}

// Upper-envelope power fit |y| <= C / x^beta from per-decade maxima.
// Returns false when fewer than two decades carry usable samples.
bool fit_power_envelope(const std::vector<double>& xs, const std::vector<double>& ys, double& C,
                        double& beta) {
    std::map<long, std::pair<double, double>> decade_max;  // decade -> (x, |y|)
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double ay = std::abs(ys[i]);
        if (!(ay > 0.0)) continue;
        const long d = static_cast<long>(std::floor(std::log10(xs[i]) + 1e-12));
        auto it = decade_max.find(d);
        if (it == decade_max.end() || ay > it->second.second)
            decade_max[d] = {xs[i], ay};
    }
    if (decade_max.size() < 2) return false;
    std::vector<double> lx, ly;
    for (const auto& [d, xy] : decade_max) {
        lx.push_back(std::log(xy.first));
        ly.push_back(std::log(xy.second));
    }
    const double slope = lsq_slope(lx, ly);
    beta = -slope;
    C = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        C = std::max(C, std::abs(ys[i]) * std::pow(xs[i], beta));
    return true;
}

void require_coverage(const PruferTrajectory& t, double a, double b, const char* who) {
    const double pad = 1e-9;
    if (t.xi.front() > a * (1 + pad) || t.xi.back() < b * (1 - pad))
        throw std::invalid_argument(std::string(who) + ": trajectory does not cover the range");
}

double weight_of(const PruferTrajectory& t, double xi) {
    if (t.flat) return 1.0;
    return weight_p(xi, t.frame);
}

}  // namespace

// ---------------------------------------------------------------- oscillatory

OscillatoryReport oscillatory_integral(const PruferTrajectory& traj, double beta2, double a,
                                       double b, OscKind kind) {
    if (!(a > 1.0) || !(b > a)) throw std::invalid_argument("oscillatory_integral: need 1 < a < b");
    if (!(beta2 > 0.0)) throw std::invalid_argument("oscillatory_integral: beta2 must be positive");
    if (kind == OscKind::AbsSin2 && beta2 != 1.0)
        throw std::invalid_argument("oscillatory_integral: abs_sin2 kind requires beta2 = 1");
    require_coverage(traj, a, b, "oscillatory_integral");

    OscillatoryReport rep;
    rep.a = a;
    rep.b = b;
    rep.beta2 = beta2;

    TrajectoryModel model(traj);

    // phase-law diagnostics: limiting velocity and decay of |theta' - gamma|
    std::vector<double> xs_in, dth_in;
    double phase_span_lo = 0, phase_span_hi = 0;
    bool first = true;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double x = traj.xi[i];
        if (x < a || x > b) continue;
        xs_in.push_back(x);
        dth_in.push_back(traj.dtheta[i]);
        if (first) {
            phase_span_lo = traj.theta[i];
            first = false;
        }
        phase_span_hi = traj.theta[i];
    }
    if (xs_in.size() < 8) throw std::invalid_argument("oscillatory_integral: too few nodes in range");
    std::vector<double> tail;
    for (std::size_t i = 0; i < xs_in.size(); ++i)
        if (xs_in[i] >= b / 10.0) tail.push_back(dth_in[i]);
    if (tail.empty()) tail = dth_in;
    std::nth_element(tail.begin(), tail.begin() + tail.size() / 2, tail.end());
    rep.gamma = tail[tail.size() / 2];

    if (std::abs(phase_span_hi - phase_span_lo) < 4.0 * M_PI || std::abs(rep.gamma) < 0.05) {
        rep.applicable = false;
        return rep;
    }

    std::vector<double> resid_x, resid_y;
    double max_resid = 0.0;
    for (std::size_t i = 0; i < xs_in.size(); ++i) {
        const double r = std::abs(dth_in[i] - rep.gamma);
        resid_x.push_back(xs_in[i]);
        resid_y.push_back(r);
        max_resid = std::max(max_resid, r);
    }
    if (max_resid < 1e-10) {
        rep.beta1 = 1e9;  // effectively an exact linear phase
    } else {
        double C1 = 0, b1 = 0;
        if (fit_power_envelope(resid_x, resid_y, C1, b1))
            rep.beta1 = std::clamp(b1, 0.05, 50.0);
        else
            rep.beta1 = 1e9;
    }

    const std::vector<const TrajectoryModel*> models{&model};
    auto integrand = [&](double x) {
        const double th = model.theta(x);
        double f = 0.0;
        switch (kind) {
            case OscKind::Sin: f = std::sin(th); break;
            case OscKind::Cos: f = std::cos(th); break;
            case OscKind::AbsSin2: f = std::abs(std::sin(2.0 * th)); break;
        }
        return f / std::pow(x, beta2);
    };
    const std::vector<const TrajectoryModel*> kinkm =
        kind == OscKind::AbsSin2 ? models : std::vector<const TrajectoryModel*>{};

    if (kind == OscKind::AbsSin2) {
        rep.value = integrate_adaptive(models, {}, kinkm, a, b, integrand);
        rep.density = rep.value / std::log(b / a);
        return rep;
    }

    // lower-endpoint sweep, five points per decade, reusing segment integrals
    std::vector<double> sweep{a};
    while (sweep.back() * std::pow(10.0, 0.2) <= b / 10.0)
        sweep.push_back(sweep.back() * std::pow(10.0, 0.2));
    std::vector<double> seg(sweep.size());
    for (std::size_t j = 0; j + 1 < sweep.size(); ++j)
        seg[j] = integrate_adaptive(models, {}, kinkm, sweep[j], sweep[j + 1], integrand);
    seg.back() = integrate_adaptive(models, {}, kinkm, sweep.back(), b, integrand);
    std::vector<double> suffix(sweep.size());
    double acc = 0.0;
    for (std::size_t j = sweep.size(); j-- > 0;) {
        acc += seg[j];
        suffix[j] = acc;
    }
    rep.value = suffix.front();

    double C = 0, beta = 0;
    if (fit_power_envelope(sweep, suffix, C, beta)) {
        rep.envelope_C = C;
        rep.envelope_exponent = beta;
    }
    const double b1 = rep.beta1;
    rep.required_exponent =
        std::min({beta2, b1 + beta2 - 1.0, 2.0 * beta2 - 1.0}) - 0.1;
    rep.envelope_ok = rep.envelope_exponent >= rep.required_exponent;
    return rep;
}

// ---------------------------------------------------------------- gram

GramReport gram_matrix(const std::vector<const PruferTrajectory*>& trajs, double B) {
    if (trajs.empty()) throw std::invalid_argument("gram_matrix: no trajectories");
    const std::size_t N = trajs.size();
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j)
            if (trajs[i]->energy == trajs[j]->energy)
                throw std::invalid_argument("gram_matrix: duplicate energies");
    for (const auto* t : trajs) require_coverage(*t, 1.0, B, "gram_matrix");

    GramReport rep;
    rep.B = B;
    std::vector<TrajectoryModel> models;
    models.reserve(N);
    for (const auto* t : trajs) {
        rep.energies.push_back(t->energy);
        models.emplace_back(*t);
    }

    rep.A.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        auto f = [&](double x) {
            const double s = std::sin(2.0 * models[i].theta(x));
            return s * s / (1.0 + x);
        };
        rep.A[i] = integrate_adaptive({&models[i]}, {}, {}, 1.0, B, f);
    }

    rep.inner.assign(N, std::vector<double>(N, 0.0));
    for (std::size_t i = 0; i < N; ++i) rep.inner[i][i] = 1.0;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = i + 1; k < N; ++k) {
            auto f = [&](double x) {
                return std::sin(2.0 * models[i].theta(x)) * std::sin(2.0 * models[k].theta(x)) /
                       (1.0 + x);
            };
            const double I = integrate_adaptive({&models[i], &models[k]}, {}, {}, 1.0, B, f);
            const double v = I / std::sqrt(rep.A[i] * rep.A[k]);
            rep.inner[i][k] = rep.inner[k][i] = v;
            rep.max_offdiag = std::max(rep.max_offdiag, std::abs(v));
        }
    }
    return rep;
}

// ---------------------------------------------------------------- orthogonality

OrthogonalityReport almost_orthogonality(const PruferTrajectory& t1, const PruferTrajectory& t2,
                                         double xi0, double Xi) {
    if (t1.energy == t2.energy)
        throw std::invalid_argument("almost_orthogonality: energies must differ");
    if (!(xi0 > 1.0) || !(Xi > xi0))
        throw std::invalid_argument("almost_orthogonality: need Xi > xi0 > 1");
    require_coverage(t1, xi0, Xi, "almost_orthogonality");
    require_coverage(t2, xi0, Xi, "almost_orthogonality");

    TrajectoryModel m1(t1), m2(t2);
    auto f = [&](double x) {
        return std::sin(2.0 * m1.theta(x)) * std::sin(2.0 * m2.theta(x)) / (1.0 + x);
    };
    const std::vector<const TrajectoryModel*> models{&m1, &m2};

    std::vector<double> sweep{xi0};
    while (sweep.back() * std::pow(10.0, 0.2) <= Xi / 100.0)
        sweep.push_back(sweep.back() * std::pow(10.0, 0.2));
    std::vector<double> seg(sweep.size());
    for (std::size_t j = 0; j + 1 < sweep.size(); ++j)
        seg[j] = integrate_adaptive(models, {}, {}, sweep[j], sweep[j + 1], f);
    seg.back() = integrate_adaptive(models, {}, {}, sweep.back(), Xi, f);
    std::vector<double> suffix(sweep.size());
    double acc = 0.0;
    for (std::size_t j = sweep.size(); j-- > 0;) {
        acc += seg[j];
        suffix[j] = acc;
    }

    OrthogonalityReport rep;
    rep.value = suffix.front();
    double C = 0, beta = 0;
    if (sweep.size() >= 11 && fit_power_envelope(sweep, suffix, C, beta)) {
        rep.fitted_C = C;
        rep.fitted_exponent = beta;
        rep.exponent_ok = beta >= (1.0 / 3.0 - 0.1);
    }
    return rep;
}

// ---------------------------------------------------------------- bessel

double inner_product_weighted(const GridFunction& f, const GridFunction& g, double lo,
                              double hi) {
    auto fn = [&](double x) { return f(x) * g(x) * (1.0 + x); };
    return integrate_adaptive({}, {&f, &g}, {}, lo, hi, fn);
}

double norm2_weighted(const GridFunction& f, double lo, double hi) {
    auto fn = [&](double x) {
        const double v = f(x);
        return v * v * (1.0 + x);
    };
    return integrate_adaptive({}, {&f}, {}, lo, hi, fn);
}

BesselCheck bessel_bound_check(const GridFunction& g, const std::vector<GridFunction>& frames,
                               double B) {
    if (frames.empty()) throw std::invalid_argument("bessel_bound_check: no frame vectors");
    const std::size_t N = frames.size();
    const double lo = 1.0;
    std::vector<double> norms(N);
    for (std::size_t i = 0; i < N; ++i) norms[i] = std::sqrt(norm2_weighted(frames[i], lo, B));

    BesselCheck chk;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = i + 1; k < N; ++k) {
            const double ip =
                inner_product_weighted(frames[i], frames[k], lo, B) / (norms[i] * norms[k]);
            chk.alpha = std::max(chk.alpha, std::abs(ip));
        }
    chk.alpha *= static_cast<double>(N);
    chk.hypothesis_ok = chk.alpha < 1.0;

    double lhs = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double ip = inner_product_weighted(g, frames[i], lo, B) / norms[i];
        lhs += ip * ip;
    }
    chk.lhs = lhs;
    chk.rhs = (1.0 + chk.alpha) * norm2_weighted(g, lo, B);
    return chk;
}

BesselCheck bessel_bound_check(const GridFunction& g, const GramReport& gram,
                               const std::vector<const PruferTrajectory*>& trajs) {
    if (trajs.size() != gram.A.size())
        throw std::invalid_argument("bessel_bound_check: gram/trajectory mismatch");
    const std::size_t N = trajs.size();
    const double B = gram.B;

    BesselCheck chk;
    chk.alpha = static_cast<double>(N) * gram.max_offdiag;
    chk.hypothesis_ok = chk.alpha < 1.0;

    double lhs = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        TrajectoryModel m(*trajs[i]);
        auto f = [&](double x) { return g(x) * std::sin(2.0 * m.theta(x)); };
        const double ip = integrate_adaptive({&m}, {&g}, {}, 1.0, B, f) / std::sqrt(gram.A[i]);
        lhs += ip * ip;
    }
    chk.lhs = lhs;
    chk.rhs = (1.0 + chk.alpha) * norm2_weighted(g, 1.0, B);
    return chk;
}

// ---------------------------------------------------------------- counting

long count_bound(double a, const StarkFrame& frame) {
    if (a < 0.0) throw std::invalid_argument("count_bound: a must be nonnegative");
    const double t = 2.0 - frame.alpha;
    return static_cast<long>(std::floor(2.0 * a * a / (t * t)));
}

// ---------------------------------------------------------------- decay fit

DecayFit decay_exponent(const PruferTrajectory& traj, double lo, double hi) {
    if (!(hi >= lo * 100.0))
        throw std::invalid_argument("decay_exponent: window must span >= 2 decades");
    require_coverage(traj, lo, hi, "decay_exponent");

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double x = traj.xi[i];
        if (x < lo || x > hi) continue;
        lx.push_back(std::log(x));
        ly.push_back(traj.logR[i]);
    }
    if (lx.size() < 16) throw std::invalid_argument("decay_exponent: too few nodes in window");

    DecayFit fit;
    fit.slope = lsq_slope(lx, ly);

    constexpr int K = 8;
    const double w0 = lx.front(), w1 = lx.back();
    double smin = 0, smax = 0;
    int nwin = 0;
    std::vector<double> wx, wy;
    for (int k = 0; k < K; ++k) {
        const double a = w0 + (w1 - w0) * k / K;
        const double b = w0 + (w1 - w0) * (k + 1) / K;
        wx.clear();
        wy.clear();
        for (std::size_t i = 0; i < lx.size(); ++i)
            if (lx[i] >= a && lx[i] <= b) {
                wx.push_back(lx[i]);
                wy.push_back(ly[i]);
            }
        if (wx.size() < 8) continue;
        const double s = lsq_slope(wx, wy);
        if (nwin == 0) {
            smin = smax = s;
        } else {
            smin = std::min(smin, s);
            smax = std::max(smax, s);
        }
        ++nwin;
    }
    fit.ci = nwin >= 2 ? 0.5 * (smax - smin) : 0.0;
    return fit;
}

// ---------------------------------------------------------------- tails

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Certified: return "L2-certified";
        case Verdict::Divergent: return "divergent";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

double tail_mass(const PruferTrajectory& traj, double a, double b) {
    require_coverage(traj, a, b, "tail_mass");
    TrajectoryModel model(traj);
    auto f = [&](double x) { return std::exp(2.0 * model.logR(x)) * weight_of(traj, x); };
    return integrate_adaptive({&model}, {}, {}, a, b, f);
}

TailReport l2_tail(const PruferTrajectory& traj) {
    const double lo = traj.xi.front(), hi = traj.xi.back();
    int k0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-12));
    std::vector<double> edges;
    for (int k = k0; std::pow(10.0, k + 1) <= hi * (1 + 1e-12); ++k)
        edges.push_back(std::pow(10.0, k));
    if (edges.size() < 3)
        throw std::invalid_argument("l2_tail: trajectory must span >= 3 full decades");

    TrajectoryModel model(traj);
    auto f = [&](double x) {
        return std::exp(2.0 * model.logR(x)) * weight_of(traj, x);
    };

    TailReport rep;
    for (double e : edges) {
        const double a = e, b = std::min(e * 10.0, hi);
        rep.decade_lo.push_back(a);
        rep.masses.push_back(integrate_adaptive({&model}, {}, {}, a, b, f));
    }
    for (std::size_t i = 0; i + 1 < rep.masses.size(); ++i)
        rep.ratios.push_back(rep.masses[i + 1] / rep.masses[i]);

    const std::size_t m = rep.ratios.size();
    const bool certified = m >= 2 && rep.ratios[m - 1] <= kGeomRatio &&
                           rep.ratios[m - 2] <= kGeomRatio;
    if (certified) {
        rep.verdict = Verdict::Certified;
        return rep;
    }
    std::vector<double> first3(rep.masses.begin(), rep.masses.begin() + 3);
    std::sort(first3.begin(), first3.end());
    const double floor_level = 0.5 * first3[1];
    bool divergent = true;
    for (double mass : rep.masses)
        if (mass < floor_level) divergent = false;
    rep.verdict = divergent ? Verdict::Divergent : Verdict::Inconclusive;
    return rep;
}

}  // namespace stark
