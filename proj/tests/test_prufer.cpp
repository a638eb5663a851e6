#include <cmath>
#include <sstream>

#include "doctest.h"
#include "stark/analysis.hpp"
#include "stark/errors.hpp"
#include "stark/prufer.hpp"

using namespace stark;

TEST_CASE("free phase rotation") {
    EffectivePotential Q = EffectivePotential::flat(nullptr);
    PruferTrajectory t = integrate(Q, 1.0, 250.0, 0.4, -0.2, 1e-10);
    CHECK(t.back().xi == doctest::Approx(250.0).epsilon(1e-12));
    for (std::size_t i = 0; i < t.size(); i += 7) {
        CHECK(t.theta[i] == doctest::Approx(0.4 + (t.xi[i] - 1.0)).epsilon(1e-10));
        CHECK(t.logR[i] == doctest::Approx(-0.2).epsilon(1e-10));
    }
}

TEST_CASE("integration preconditions") {
    EffectivePotential Q = EffectivePotential::flat(nullptr);
    CHECK_THROWS_AS(integrate(Q, -1.0, 10.0, 0.0, 0.0, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(integrate(Q, 5.0, 2.0, 0.0, 0.0, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(integrate(Q, 1.0, 10.0, 0.0, 0.0, 1e-2), std::invalid_argument);
}

TEST_CASE("amplitude bound for the bare transformed operator") {
    StarkFrame fr(1.0);
    EffectivePotential Q = assemble_Q(nullptr, 0.0, fr);
    PruferTrajectory t = integrate(Q, 1.0, 1e3, 1.0, 0.0, 1e-10);
    // |d logR| <= (1/2)(5/36) xi^{-2} integrates to below 5/72
    double lo = 0.0, hi = 0.0;
    for (double lr : t.logR) {
        lo = std::min(lo, lr);
        hi = std::max(hi, lr);
    }
    CHECK(hi - lo <= 5.0 / 72.0 * 1.01);
}

TEST_CASE("free oscillation density over two decades") {
    StarkFrame fr(1.0);
    EffectivePotential Q = assemble_Q(nullptr, 0.0, fr);
    PruferTrajectory t = integrate(Q, 1e3, 1e5, 0.7, 0.0, 1e-9);
    OscillatoryReport rep = oscillatory_integral(t, 1.0, 1e3, 1e5, OscKind::AbsSin2);
    CHECK(rep.density * M_PI / 2.0 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("tolerance convergence of the amplitude") {
    StarkFrame fr(1.0);
    EffectivePotential Q = assemble_Q(nullptr, 1.0, fr);
    PruferTrajectory coarse = integrate(Q, 1.0, 2e3, 0.9, 0.0, 1e-8);
    PruferTrajectory fine = integrate(Q, 1.0, 2e3, 0.9, 0.0, 1e-9);
    const double change = std::abs(coarse.back().logR - fine.back().logR);
    const double budget = 10.0 * 1e-8 * static_cast<double>(coarse.size());
    CHECK(change <= budget);
}

TEST_CASE("leading-order phase monotonicity") {
    StarkFrame fr(1.0);
    const double d = 0.4;
    CoupledOptions opts;
    opts.tol = 1e-9;
    CoupledRun run = integrate_sign_coupled(0.0, SgnCoupling{[d](double) { return d; }}, fr,
                                            1.0, 3e3, 1.0, opts);
    TrajectoryModel model(run.traj);
    for (double xi = 10.0; xi + 1.0 < 3e3; xi *= 1.7) {
        const double adv = model.theta(xi + 1.0) - model.theta(xi);
        CHECK(adv >= 0.5);
        CHECK(adv <= 1.5);
    }
}

TEST_CASE("modified variables reduce to the standard ones at E = 0") {
    StarkFrame fr(0.5);
    EffectivePotential Q = assemble_Q(nullptr, 0.0, fr);
    PruferTrajectory a = integrate(Q, 1.0, 300.0, 1.1, 0.0, 1e-9);
    PruferTrajectory b = integrate_modified(Q, 1.0, 300.0, 1.1, 0.0, 1e-9);
    CHECK(a.back().theta == doctest::Approx(b.back().theta).epsilon(1e-12));
    CHECK(a.back().logR == doctest::Approx(b.back().logR).epsilon(1e-12));
}

TEST_CASE("modified and standard solves agree through the solution itself") {
    StarkFrame fr(1.0);
    EffectivePotential Q = assemble_Q(nullptr, 1.0, fr);
    const double xi1 = 200.0;
    PruferTrajectory std_t = integrate(Q, 1.0, xi1, 0.7, 0.0, 1e-11);
    PruferTrajectory mod_t = integrate_modified(Q, 1.0, xi1, 0.0, 0.0, 1e-11);

    // match the modified start data to the standard one: both encode
    // phi(1) = sin(0.7), phi'(1) = cos(0.7)
    const double s0 = mod_t.frame_factor(1.0);
    const double phi0 = std::sin(0.7), dphi0 = std::cos(0.7);
    const double theta_m0 = std::atan2(s0 * phi0, dphi0);
    const double logR_m0 = 0.5 * std::log(s0 * s0 * phi0 * phi0 + dphi0 * dphi0);
    PruferTrajectory mod = integrate_modified(Q, 1.0, xi1, theta_m0, logR_m0, 1e-11);

    const double phi_std = std::exp(std_t.back().logR) * std::sin(std_t.back().theta);
    const double dphi_std = std::exp(std_t.back().logR) * std::cos(std_t.back().theta);
    const double s1 = mod.frame_factor(xi1);
    const double phi_mod = std::exp(mod.back().logR) * std::sin(mod.back().theta) / s1;
    const double dphi_mod = std::exp(mod.back().logR) * std::cos(mod.back().theta);
    CHECK(phi_mod == doctest::Approx(phi_std).epsilon(1e-9));
    CHECK(dphi_mod == doctest::Approx(dphi_std).epsilon(1e-9));
}

TEST_CASE("modified frame rejects a vanishing frequency") {
    StarkFrame fr(1.0);
    EffectivePotential Q = assemble_Q(nullptr, -2.0, fr);
    // 1 + E p(xi) <= 0 near xi = 1 for E = -2
    CHECK_THROWS_AS(integrate_modified(Q, 1.0, 10.0, 0.5, 0.0, 1e-9), FrameError);
}

TEST_CASE("modified free density at alpha = 0.5") {
    StarkFrame fr(0.5);
    EffectivePotential Q = assemble_Q(nullptr, 1.0, fr);
    PruferTrajectory t = integrate_modified(Q, 1e3, 1e5, 0.3, 0.0, 1e-9);
    OscillatoryReport rep = oscillatory_integral(t, 1.0, 1e3, 1e5, OscKind::AbsSin2);
    CHECK(rep.density * M_PI / 2.0 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sign-coupled run realizes the exact envelope") {
    StarkFrame fr(1.0);
    const double d = M_PI / 6.0;
    CoupledOptions opts;
    opts.tol = 1e-9;
    CoupledRun run = integrate_sign_coupled(0.0, SgnCoupling{[d](double) { return d; }}, fr,
                                            1.0, 1e4, 1.0, opts);
    for (std::size_t i = 0; i < run.V.size(); ++i) {
        const double v = run.V.node(i) * std::abs(run.V.value(i));
        CHECK(v == doctest::Approx(2.0 * d).epsilon(1e-9));
    }

    // every detected switch flips the sign of sin 2 theta
    REQUIRE(run.traj.events.size() > 100);
    for (std::size_t e : run.traj.events) {
        REQUIRE(e >= 1);
        REQUIRE(e + 1 < run.traj.size());
        const double before = std::sin(2.0 * run.traj.theta[e - 1]);
        const double after = std::sin(2.0 * run.traj.theta[e + 1]);
        CHECK(before * after < 0.0);
    }
}

TEST_CASE("sign-coupled decay rate matches the resonant prediction") {
    StarkFrame fr(1.0);
    const double d = M_PI / 6.0;
    CoupledOptions opts;
    opts.tol = 1e-9;
    CoupledRun run = integrate_sign_coupled(0.0, SgnCoupling{[d](double) { return d; }}, fr,
                                            1.0, 1e5, 1.0, opts);
    DecayFit fit = decay_exponent(run.traj, 1e3, 1e5);
    CHECK(fit.slope == doctest::Approx(-1.0 / 3.0).epsilon(0.05));
}

TEST_CASE("smooth coupling with zero strength is the free flow") {
    StarkFrame fr(1.0);
    CoupledOptions opts;
    opts.tol = 1e-9;
    CoupledRun run = integrate_sign_coupled(0.5, SinCoupling{0.0, 0.0}, fr, 1.0, 500.0, 0.8,
                                            opts);
    EffectivePotential Q = assemble_Q(nullptr, 0.5, fr);
    PruferTrajectory free_t = integrate(Q, 1.0, 500.0, 0.8, 0.0, 1e-9);
    CHECK(run.traj.back().theta == doctest::Approx(free_t.back().theta).epsilon(1e-12));
    CHECK(run.traj.back().logR == doctest::Approx(free_t.back().logR).epsilon(1e-10));
    for (std::size_t i = 0; i < run.V.size(); ++i) CHECK(run.V.value(i) == 0.0);
}

TEST_CASE("saturated coupling slides instead of chattering") {
    StarkFrame fr(1.0);
    const double d = 0.6;  // 2d > 1 makes the switch surface attracting near xi = 1
    CoupledOptions opts;
    opts.tol = 1e-9;
    CoupledRun run = integrate_sign_coupled(0.0, SgnCoupling{[d](double) { return d; }}, fr,
                                            1.0, 50.0, M_PI_2, opts);
    run.traj.validate();
    for (std::size_t i = 0; i < run.V.size(); ++i)
        CHECK(run.V.node(i) * std::abs(run.V.value(i)) <= 2.0 * d * (1 + 1e-9));
    CHECK(run.traj.back().xi == doctest::Approx(50.0).epsilon(1e-9));
}

TEST_CASE("solution reconstruction") {
    SUBCASE("free solution is a pure sine") {
        EffectivePotential Q = EffectivePotential::flat(nullptr);
        PruferTrajectory t = integrate(Q, 1.0, 80.0, 0.0, 0.0, 1e-10);
        GridFunction phi = reconstruct_phi(t);
        for (std::size_t i = 0; i < phi.size(); i += 3)
            CHECK(phi.value(i) == doctest::Approx(std::sin(phi.node(i) - 1.0)).epsilon(1e-8));
    }

    SUBCASE("synthetic constant-phase trajectory") {
        PruferTrajectory t;
        t.flat = true;
        for (int i = 0; i <= 10; ++i)
            t.append(1.0 + i, M_PI_2 + 0.3, 0.0, 0.0, 0.0);
        GridFunction phi = reconstruct_phi(t);
        for (std::size_t i = 0; i < phi.size(); ++i)
            CHECK(phi.value(i) == doctest::Approx(std::sin(M_PI_2 + 0.3)).epsilon(1e-14));
    }
}

TEST_CASE("reconstructed solution satisfies the equation under refinement") {
    StarkFrame fr(1.0);
    EffectivePotential Q = assemble_Q(nullptr, 0.0, fr);
    PruferTrajectory t = integrate(Q, 1.0, 100.0, 0.3, 0.0, 1e-11);
    TrajectoryModel model(t);

    auto residual = [&](double h) {
        double worst = 0.0;
        for (double x = 50.0; x < 60.0; x += 0.37) {
            auto phi = [&](double s) { return std::exp(model.logR(s)) * std::sin(model.theta(s)); };
            const double d2 = (phi(x - h) - 2.0 * phi(x) + phi(x + h)) / (h * h);
            worst = std::max(worst, std::abs(-d2 + (Q(x) - 1.0) * phi(x)));
        }
        return worst;
    };
    const double r1 = residual(0.02);
    const double r2 = residual(0.01);
    CHECK(r2 < r1);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.6));
}

TEST_CASE("trajectory export carries the three state columns") {
    EffectivePotential Q = EffectivePotential::flat(nullptr);
    PruferTrajectory t = integrate(Q, 1.0, 20.0, 0.4, 0.0, 1e-9);
    std::stringstream ss;
    t.save(ss);
    std::string header;
    std::getline(ss, header);
    CHECK(header.find("prufer-trajectory") != std::string::npos);
    CHECK(header.find("E=0") != std::string::npos);
    std::string comment;
    std::getline(ss, comment);
    double a, b, c;
    ss >> a >> b >> c;
    CHECK(a == 1.0);
    CHECK(b == doctest::Approx(0.4));
    CHECK(c == 0.0);
}
