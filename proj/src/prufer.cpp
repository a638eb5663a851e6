#include "stark/prufer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "stark/errors.hpp"
#include "stark/ode.hpp"

namespace stark {
namespace {

constexpr double kPhaseCap = 0.8;   // max phase advance per stored interval
constexpr double kPhaseHard = 1.3;  // redo threshold; must stay below pi/2
constexpr double kJumpGap = 1e-12;  // relative gap of paired switch nodes
constexpr double kVFill = 1.0 / 1500.0;  // relative spacing of realized-V envelope nodes
constexpr double kSinSample = 0.05;      // phase spacing of smooth-coupling V samples

enum class VMode { Plain, Sgn, Sin };

struct PhaseSystem {
    double curv = 0.0, energy = 0.0, wexp = 0.0, cpow = 1.0;
    bool flat = false, modified = false;
    const GridFunction* vgrid = nullptr;
    VMode vmode = VMode::Plain;
    const std::function<double(double)>* coupling_d = nullptr;  // sgn coupling
    double sigma = 1.0;                                         // frozen sign
    double Msin = 0.0, bsin = 0.0;                              // sin coupling

    double weight(double x) const { return std::pow(x, -wexp) / cpow; }

    double s_factor(double x) const {
        if (flat || !modified) return 1.0;
        const double v = 1.0 + energy * weight(x);
        if (!(v > 0.0))
            throw FrameError("modified frame: 1 - H_alpha <= 0 at xi=" + format_double(x));
        return std::sqrt(v);
    }

    double ambient(double x) const {
        if (flat) return 0.0;
        if (modified) return curv / (x * x);
        return curv / (x * x) - energy * weight(x);
    }

    double sgn_value(double x) const { return -2.0 * (*coupling_d)(x)*sigma / x; }

    void eval(double x, const std::array<double, 2>& y, std::array<double, 2>& dy) const {
        double s = 1.0, dsv = 0.0;
        if (!flat && modified) {
            const double p = weight(x);
            const double s2 = 1.0 + energy * p;
            if (!(s2 > 0.0))
                throw FrameError("modified frame: 1 - H_alpha <= 0 at xi=" + format_double(x));
            s = std::sqrt(s2);
            dsv = -0.5 * wexp * energy * p / (s * x);
        }
        const double amb = ambient(x);
        const double th = y[0];
        const double s2t = std::sin(2.0 * th);
        const double c2t = std::cos(2.0 * th);
        const double sinsq = 0.5 * (1.0 - c2t);
        double V = 0.0;
        switch (vmode) {
            case VMode::Plain: V = vgrid ? (*vgrid)(x) : 0.0; break;
            case VMode::Sgn: V = sgn_value(x); break;
            case VMode::Sin: V = -4.0 * Msin * s2t / (1.0 + x - bsin); break;
        }
        if (!std::isfinite(V) || !std::isfinite(amb))
            throw IntegrationError("non-finite effective potential", x, y[0], y[1]);
        const double c1 = (amb + V) / s;
        dy[0] = s - c1 * sinsq + 0.5 * (dsv / s) * s2t;
        dy[1] = 0.5 * c1 * s2t + (dsv / s) * sinsq;
    }
};

struct RhsRef {
    PhaseSystem* sys;
    void operator()(double x, const std::array<double, 2>& y, std::array<double, 2>& dy) const {
        sys->eval(x, y, dy);
    }
};

PhaseSystem make_system(const EffectivePotential& Q, bool modified) {
    PhaseSystem s;
    s.flat = Q.is_flat();
    s.energy = Q.energy();
    s.modified = modified && !s.flat;
    if (!s.flat) {
        s.curv = Q.frame().curvature;
        s.wexp = Q.frame().weight_exp;
        s.cpow = Q.frame().c_pow_alpha;
    }
    s.vgrid = Q.V();
    return s;
}

int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

class PruferDriver {
public:
    PruferDriver(PhaseSystem& sys, const StarkFrame& frame, double E, double tol,
                 GridBuilder* vout)
        : sys_(sys), tol_(tol), vout_(vout), stepper_(RhsRef{&sys}, tol) {
        out_.energy = E;
        out_.frame = frame;
        out_.flat = sys.flat;
        out_.modified = sys.modified;
        out_.tol = tol;
    }

    PruferTrajectory run(double xi0, double xi1, double theta0, double logR0) {
        if (!(xi0 > 0.0) || !(xi1 > xi0))
            throw std::invalid_argument("integrate: need 0 < xi0 < xi1");
        if (!(tol_ > 0.0) || tol_ > 1e-3)
            throw std::invalid_argument("integrate: tol must lie in (0, 1e-3]");
        xi1_ = xi1;
        out_.theta0 = theta0;

        if (sys_.vmode == VMode::Sgn) {
            const double s2t = std::sin(2.0 * theta0);
            sys_.sigma = std::abs(s2t) > 1e-12 ? (s2t > 0 ? 1.0 : -1.0)
                                               : (std::cos(2.0 * theta0) >= 0 ? 1.0 : -1.0);
        }

        std::array<double, 2> y{theta0, logR0};
        stepper_.start(xi0, y);
        store_node(xi0, y, stepper_.dy());
        if (vout_) record_v_node(xi0, y[0]);
        reset_targets(y[0]);

        while (remaining(stepper_.x()) > 0.0) {
            const double x0 = stepper_.x();
            const std::array<double, 2> y0 = stepper_.y();
            const double phase_rate = std::max(std::abs(stepper_.dy()[0]), 0.25);
            double hmax = std::min(remaining(x0), kPhaseCap / phase_rate);

            ode::Step<2> s = stepper_.step(hmax);
            // keep the phase span per stored interval below pi/2
            for (int shrink = 0; std::abs(s.y1[0] - s.y0[0]) > kPhaseHard && shrink < 12;
                 ++shrink) {
                hmax = (s.x1 - s.x0) * kPhaseHard / std::abs(s.y1[0] - s.y0[0]) * 0.7;
                stepper_.set_state(x0, y0);
                s = stepper_.step(hmax);
            }

            if (sys_.vmode == VMode::Sgn) {
                double target = 0.0;
                int dir = 0;
                if (s.y1[0] >= up_target_) {
                    target = up_target_;
                    dir = 1;
                } else if (s.y1[0] <= down_target_) {
                    target = down_target_;
                    dir = -1;
                }
                if (dir != 0) {
                    handle_switch(s, target, dir);
                    continue;
                }
            }

            store_node(s.x1, s.y1, s.f1);
            if (vout_) record_step_v(s);
        }
        out_.validate();
        return std::move(out_);
    }

private:
    double remaining(double x) const {
        const double r = xi1_ - x;
        return r > std::abs(xi1_) * 1e-15 ? r : 0.0;
    }

    void store_node(double x, const std::array<double, 2>& y, const std::array<double, 2>& d) {
        out_.append(x, y[0], y[1], d[0], d[1]);
    }

    void reset_targets(double th) {
        const double half = M_PI_2;
        const double guard = 1e-9 + std::abs(th) * 1e-13;
        double k = std::floor(th / half);
        up_target_ = (k + 1.0) * half;
        if (up_target_ - th < guard) up_target_ += half;
        down_target_ = k * half;
        if (th - down_target_ < guard) down_target_ -= half;
    }

    // ----- realized-V recording -----

    void record_v_node(double x, double theta) {
        double v = 0.0;
        if (sys_.vmode == VMode::Sgn) v = sys_.sgn_value(x);
        else v = -4.0 * sys_.Msin * std::sin(2.0 * theta) / (1.0 + x - sys_.bsin);
        vout_->add(x, v);
        vlast_ = x;
    }

    void record_step_v(const ode::Step<2>& s) {
        if (sys_.vmode == VMode::Sgn) {
            fill_envelope(s.x1);
        } else if (sys_.vmode == VMode::Sin) {
            const double span = std::abs(s.y1[0] - s.y0[0]);
            const int m = std::max(1, static_cast<int>(std::ceil(span / kSinSample)));
            for (int j = 1; j <= m; ++j) {
                const double x = s.x0 + (s.x1 - s.x0) * j / m;
                const double th = ode::hermite(s, 0, x);
                record_v_node(x, th);
            }
        }
    }

    void fill_envelope(double upto) {
        double gap = vlast_ * kVFill;
        while (vlast_ + gap < upto) {
            const double x = vlast_ + gap;
            vout_->add(x, sys_.sgn_value(x));
            vlast_ = x;
            gap = vlast_ * kVFill;
        }
    }

    // ----- sign switches -----

    void handle_switch(const ode::Step<2>& s, double theta_star, int dir) {
        // locate the crossing on the dense model, then redo the step up to it
        double a = s.x0, b = s.x1;
        for (int it = 0; it < 80 && (b - a) > kJumpGap * std::abs(b); ++it) {
            const double mid = 0.5 * (a + b);
            const double th = ode::hermite(s, 0, mid);
            if ((th - theta_star) * dir < 0.0)
                a = mid;
            else
                b = mid;
        }
        const double xe = 0.5 * (a + b);

        std::array<double, 2> ye = s.y0;
        if (xe > s.x0 + std::abs(s.x0) * 1e-15) {
            ode::Rk45<2, RhsRef> sub(RhsRef{&sys_}, tol_);
            sub.start(s.x0, s.y0);
            while (xe - sub.x() > std::abs(xe) * 1e-15) sub.step(xe - sub.x());
            ye = sub.y();
        }
        ye[0] = theta_star;  // snap onto the switch surface

        // left-sided derivative for the interval ending here
        std::array<double, 2> dleft;
        sys_.eval(xe, ye, dleft);
        store_node(xe, ye, dleft);
        out_.events.push_back(out_.size() - 1);
        if (vout_) {
            fill_envelope(xe);
            vout_->add(xe, sys_.sgn_value(xe));
            vlast_ = xe;
        }

        const double sigma_old = sys_.sigma;
        sys_.sigma = -sigma_old;

        // an odd quarter-turn surface can trap the phase when the coupling
        // exceeds the local frequency: handle the Filippov sliding segment
        const double kq = std::round(theta_star / M_PI_2);
        const bool odd_surface = std::llround(kq) % 2 != 0;
        std::array<double, 2> dnew;
        sys_.eval(xe, ye, dnew);
        if (odd_surface && dnew[0] * dir < 0.0) {
            slide(xe, ye, theta_star, dir);
            return;
        }

        // micro-advance past the surface so node derivatives stay one-sided
        const double delta = kJumpGap * std::max(std::abs(xe), 1.0);
        std::array<double, 2> yp{ye[0] + delta * dnew[0], ye[1] + delta * dnew[1]};
        std::array<double, 2> dp;
        sys_.eval(xe + delta, yp, dp);
        store_node(xe + delta, yp, dp);
        if (vout_) {
            vout_->add(xe + delta, sys_.sgn_value(xe + delta));
            vlast_ = xe + delta;
        }
        stepper_.set_state(xe + delta, yp);
        reset_targets(yp[0]);
    }

    void slide(double xe, std::array<double, 2> ye, double theta_star, int dir) {
        // on the surface: theta pinned, the effective potential balances the
        // drift; release where the bang value can hold the balance again
        auto exit_rate = [&](double x) {
            std::array<double, 2> yy{theta_star, 0.0}, d;
            sys_.eval(x, yy, d);
            return d[0] * dir;
        };
        double a = xe, b = std::min(xi1_, xe * 1.05 + 0.1);
        while (b < xi1_ && exit_rate(b) < 0.0) {
            a = b;
            b = std::min(xi1_, b * 1.3 + 0.1);
        }
        double xr = xi1_;
        if (exit_rate(b) >= 0.0) {
            for (int it = 0; it < 100 && (b - a) > std::abs(b) * 1e-15; ++it) {
                const double mid = 0.5 * (a + b);
                if (exit_rate(mid) < 0.0)
                    a = mid;
                else
                    b = mid;
            }
            xr = b;
        }

        const double lr = ye[1] + (sys_.modified
                                       ? std::log(sys_.s_factor(xr) / sys_.s_factor(xe))
                                       : 0.0);
        auto slide_dlogr = [&](double x) {
            if (!sys_.modified) return 0.0;
            const double p = sys_.weight(x);
            const double sf = sys_.s_factor(x);
            return -0.5 * sys_.wexp * sys_.energy * p / (sf * sf * x);
        };

        // paired node just inside the sliding stretch
        const double delta = kJumpGap * std::max(std::abs(xe), 1.0);
        const double xs = std::min(xe + delta, xr);
        store_node(xs, {theta_star, ye[1]}, {0.0, slide_dlogr(xs)});
        if (vout_) {
            auto veff = [&](double x) {
                const double sf = sys_.s_factor(x);
                return sf * sf - sys_.ambient(x);
            };
            vout_->add(xs, veff(xs));
            double gap = xs * kVFill;
            double x = xs;
            while (x + gap < xr) {
                x += gap;
                vout_->add(x, veff(x));
                gap = x * kVFill;
            }
            vout_->add(xr, veff(xr));
            vlast_ = xr;
        }

        std::array<double, 2> yr{theta_star, lr};
        std::array<double, 2> dr;
        sys_.eval(xr, yr, dr);
        store_node(xr, yr, dr);

        if (remaining(xr) > 0.0) {
            stepper_.set_state(xr, yr);
            reset_targets(theta_star);
        }
    }

    PhaseSystem& sys_;
    double tol_;
    GridBuilder* vout_;
    ode::Rk45<2, RhsRef> stepper_;
    PruferTrajectory out_;
    double xi1_ = 0.0;
    double up_target_ = 0.0, down_target_ = 0.0;
    double vlast_ = 0.0;
};

}  // namespace

double PruferTrajectory::frame_factor(double x) const {
    if (!modified || flat) return 1.0;
    const double p = std::pow(x, -frame.weight_exp) / frame.c_pow_alpha;
    return std::sqrt(1.0 + energy * p);
}

void PruferTrajectory::append(double x, double th, double lr, double dth, double dlr) {
    xi.push_back(x);
    theta.push_back(th);
    logR.push_back(lr);
    dtheta.push_back(dth);
    dlogR.push_back(dlr);
}

void PruferTrajectory::extend(const PruferTrajectory& tail) {
    if (tail.size() == 0) return;
    if (size() == 0) {
        *this = tail;
        return;
    }
    if (std::abs(tail.xi.front() - xi.back()) > std::abs(xi.back()) * 1e-12 ||
        std::abs(tail.theta.front() - theta.back()) > 1e-9)
        throw std::invalid_argument("PruferTrajectory::extend: discontinuous continuation");
    const std::size_t base = size();
    for (std::size_t i = 1; i < tail.size(); ++i)
        append(tail.xi[i], tail.theta[i], tail.logR[i], tail.dtheta[i], tail.dlogR[i]);
    for (std::size_t e : tail.events)
        if (e >= 1) events.push_back(base + e - 1);
}

void PruferTrajectory::validate() const {
    if (size() == 0) throw std::invalid_argument("PruferTrajectory: empty");
    for (std::size_t i = 0; i + 1 < size(); ++i) {
        if (!(xi[i] < xi[i + 1]))
            throw std::invalid_argument("PruferTrajectory: xi must be strictly increasing");
        if (!(std::abs(theta[i + 1] - theta[i]) < M_PI))
            throw std::invalid_argument("PruferTrajectory: phase jump exceeds pi");
    }
    for (std::size_t i = 0; i < size(); ++i)
        if (!std::isfinite(theta[i]) || !std::isfinite(logR[i]))
            throw std::invalid_argument("PruferTrajectory: non-finite state");
}

void PruferTrajectory::save(std::ostream& os) const {
    os << "# prufer-trajectory E=" << format_double(energy)
       << " alpha=" << format_double(frame.alpha) << " tol=" << format_double(tol)
       << " modified=" << (modified ? 1 : 0) << " flat=" << (flat ? 1 : 0)
       << " theta0=" << format_double(theta0) << " n=" << size() << "\n";
    os << "# columns: xi theta logR\n";
    for (std::size_t i = 0; i < size(); ++i)
        os << format_double(xi[i]) << " " << format_double(theta[i]) << " "
           << format_double(logR[i]) << "\n";
}

void PruferTrajectory::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("PruferTrajectory: cannot open " + path);
    save(os);
}

PruferTrajectory integrate(const EffectivePotential& Q, double xi0, double xi1, double theta0,
                           double logR0, double tol) {
    PhaseSystem sys = make_system(Q, false);
    PruferDriver drv(sys, Q.frame(), Q.energy(), tol, nullptr);
    return drv.run(xi0, xi1, theta0, logR0);
}

PruferTrajectory integrate_modified(const EffectivePotential& Q, double xi0, double xi1,
                                    double theta0, double logR0, double tol) {
    PhaseSystem sys = make_system(Q, true);
    sys.s_factor(xi0);  // precondition: 1 - H_alpha > 0 at the start point
    PruferDriver drv(sys, Q.frame(), Q.energy(), tol, nullptr);
    return drv.run(xi0, xi1, theta0, logR0);
}

CoupledRun integrate_sign_coupled(double E, const CouplingMode& mode, const StarkFrame& frame,
                                  double xi0, double xi1, double theta0,
                                  const CoupledOptions& opts) {
    PhaseSystem sys;
    sys.flat = opts.flat;
    sys.energy = E;
    sys.modified = opts.modified && !opts.flat;
    if (!sys.flat) {
        sys.curv = frame.curvature;
        sys.wexp = frame.weight_exp;
        sys.cpow = frame.c_pow_alpha;
    }
    const std::function<double(double)>* dkeep = nullptr;
    if (std::holds_alternative<SgnCoupling>(mode)) {
        dkeep = &std::get<SgnCoupling>(mode).d;
        sys.vmode = VMode::Sgn;
        sys.coupling_d = dkeep;
    } else {
        const auto& sc = std::get<SinCoupling>(mode);
        sys.vmode = VMode::Sin;
        sys.Msin = sc.M;
        sys.bsin = sc.b;
    }
    GridBuilder vb;
    PruferDriver drv(sys, frame, E, opts.tol, &vb);
    PruferTrajectory traj = drv.run(xi0, xi1, theta0, opts.logR0);
    GridFunction V = vb.take(Interp::Linear, Domain::Xi);
    return {std::move(traj), std::move(V)};
}

GridFunction reconstruct_phi(const PruferTrajectory& traj) {
    if (traj.size() == 0) throw std::invalid_argument("reconstruct_phi: empty trajectory");
    std::vector<double> xs(traj.size()), vs(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        xs[i] = traj.xi[i];
        vs[i] = std::exp(traj.logR[i]) * std::sin(traj.theta[i]) / traj.frame_factor(traj.xi[i]);
    }
    return GridFunction(std::move(xs), std::move(vs), Interp::Linear,
                        traj.flat ? Domain::X : Domain::Xi);
}

}  // namespace stark
