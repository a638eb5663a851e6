#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "stark/frame.hpp"
#include "stark/grid_function.hpp"
#include "stark/potential.hpp"

using namespace stark;

TEST_CASE("coordinate map at alpha=1") {
    StarkFrame fr(1.0);
    CHECK(xi_of_x(0.0, fr) == 0.0);
    CHECK(xi_of_x(1.0, fr) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    // (2/3) * 4^{3/2} = 16/3 by hand
    CHECK(xi_of_x(4.0, fr) == doctest::Approx(16.0 / 3.0).epsilon(1e-15));
    CHECK(x_of_xi(2.0 / 3.0, fr) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x_of_xi(0.0, fr) == 0.0);
    CHECK(fr.c_alpha == doctest::Approx(std::pow(1.5, 2.0 / 3.0)).epsilon(1e-15));
    CHECK_THROWS_AS(xi_of_x(-1.0, fr), std::domain_error);
    CHECK_THROWS_AS(x_of_xi(-0.5, fr), std::domain_error);
}

TEST_CASE("round trip across exponents") {
    for (double alpha : {0.5, 1.0, 1.5}) {
        StarkFrame fr(alpha);
        for (double x : {0.5, 1.0, 10.0, 100.0, 1e4, 1e6}) {
            const double back = x_of_xi(xi_of_x(x, fr), fr);
            CHECK(std::abs(back - x) <= 1e-12 * x);
        }
    }
}

TEST_CASE("frame validation") {
    CHECK_THROWS_AS(StarkFrame(0.0), std::invalid_argument);
    CHECK_THROWS_AS(StarkFrame(2.0), std::invalid_argument);
    CHECK_THROWS_AS(StarkFrame(-1.0), std::invalid_argument);
}

TEST_CASE("weight function") {
    StarkFrame fr(1.0);
    CHECK(weight_p(1.0, fr) == doctest::Approx(std::pow(1.5, -2.0 / 3.0)).epsilon(1e-15));
    // p(8) = 1/(c * 8^{2/3}) = 1/(4c)
    CHECK(weight_p(8.0, fr) == doctest::Approx(0.25 / fr.c_alpha).epsilon(1e-14));
    CHECK_THROWS_AS(weight_p(0.0, fr), std::domain_error);

    double prev = weight_p(0.5, fr);
    for (double xi = 1.0; xi < 1e5; xi *= 3.7) {
        const double p = weight_p(xi, fr);
        CHECK(p < prev);
        prev = p;
    }
    // p(xi(x)) x^alpha = 1
    for (double alpha : {0.5, 1.0, 1.5}) {
        StarkFrame f2(alpha);
        for (double x : {0.3, 2.0, 77.0, 5e3}) {
            const double v = weight_p(xi_of_x(x, f2), f2) * std::pow(x, alpha);
            CHECK(std::abs(v - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("grid function basics") {
    GridFunction g({1.0, 2.0, 4.0}, {10.0, 20.0, -5.0}, Interp::Linear, Domain::Xi);
    CHECK(g(1.0) == 10.0);
    CHECK(g(2.0) == 20.0);
    CHECK(g(4.0) == -5.0);
    CHECK(g(3.0) == doctest::Approx(7.5));
    CHECK_THROWS_AS(g(0.5), std::domain_error);
    CHECK_THROWS_AS(g(4.5), std::domain_error);

    GridFunction cl({1.0, 2.0, 4.0}, {10.0, 20.0, -5.0}, Interp::ConstantLeft, Domain::Xi);
    CHECK(cl(1.5) == 10.0);
    CHECK(cl(3.9) == 20.0);
    CHECK(cl(2.0) == 20.0);

    CHECK_THROWS_AS(GridFunction({}, {}, Interp::Linear, Domain::Xi), std::invalid_argument);
    CHECK_THROWS_AS(GridFunction({1.0, 1.0}, {0.0, 0.0}, Interp::Linear, Domain::Xi),
                    std::invalid_argument);
    CHECK_THROWS_AS(GridFunction({1.0, 2.0}, {0.0}, Interp::Linear, Domain::Xi),
                    std::invalid_argument);
}

TEST_CASE("grid function serialization round trip") {
    std::mt19937_64 rng(7);
    std::vector<double> xs, vs;
    double x = 0.37;
    for (int i = 0; i < 57; ++i) {
        xs.push_back(x);
        vs.push_back(std::sin(0.1 * i) * std::exp(2.0 * (static_cast<double>(rng() >> 11) *
                                                         0x1.0p-53 - 0.5)));
        x *= 1.31;
    }
    GridFunction g(xs, vs, Interp::Linear, Domain::X);
    std::stringstream ss;
    g.save(ss, 1.5);
    auto [g2, alpha] = GridFunction::load(ss);
    CHECK(alpha == 1.5);
    CHECK(g2.domain() == Domain::X);
    CHECK(g2.size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g2.node(i) == g.node(i));
        CHECK(g2.value(i) == g.value(i));
    }
}

TEST_CASE("dictionary between q and V") {
    StarkFrame fr(1.0);

    SUBCASE("zero maps to zero") {
        GridFunction V({1.0, 10.0, 100.0}, {0.0, 0.0, 0.0}, Interp::Linear, Domain::Xi);
        GridFunction q = q_from_V(V, fr);
        for (std::size_t i = 0; i < q.size(); ++i) CHECK(q.value(i) == 0.0);
    }

    SUBCASE("V = 1/xi maps to (3/2) x^{-1/2}") {
        std::vector<double> xs, vs;
        for (double xi = 1.0; xi <= 1e4; xi *= 1.5) {
            xs.push_back(xi);
            vs.push_back(1.0 / xi);
        }
        GridFunction V(xs, vs, Interp::Linear, Domain::Xi);
        GridFunction q = q_from_V(V, fr);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double x = q.node(i);
            CHECK(q.value(i) == doctest::Approx(1.5 / std::sqrt(x)).epsilon(1e-13));
        }
    }

    SUBCASE("sign form: sqrt(x)|q| = 3 d at every node") {
        const double d = 0.21;
        std::vector<double> xs, vs;
        int s = 1;
        for (double xi = 1.0; xi <= 1e4; xi *= 1.4) {
            xs.push_back(xi);
            vs.push_back(-2.0 * d / xi * s);
            s = -s;
        }
        GridFunction V(xs, vs, Interp::Linear, Domain::Xi);
        GridFunction q = q_from_V(V, fr);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double x = q.node(i);
            CHECK(std::sqrt(x) * std::abs(q.value(i)) == doctest::Approx(3.0 * d).epsilon(1e-12));
        }
    }

    SUBCASE("general identity sqrt(x)|q| = (3/2) xi |V| at xi = (2/3)x^{3/2}") {
        std::mt19937_64 rng(11);
        std::vector<double> xs, vs;
        for (double xi = 2.0; xi <= 1e5; xi *= 1.9) {
            xs.push_back(xi);
            vs.push_back((static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) / xi);
        }
        GridFunction V(xs, vs, Interp::Linear, Domain::Xi);
        GridFunction q = q_from_V(V, fr);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double lhs = std::sqrt(q.node(i)) * std::abs(q.value(i));
            const double rhs = 1.5 * V.node(i) * std::abs(V.value(i));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }

    SUBCASE("inverse round trip on a 1000-node log grid") {
        std::vector<double> xs, vs;
        for (int i = 0; i < 1000; ++i) {
            const double xi = std::pow(10.0, 6.0 * i / 999.0);
            xs.push_back(xi);
            vs.push_back(std::cos(0.01 * i) / (1.0 + xi));
        }
        GridFunction V(xs, vs, Interp::Linear, Domain::Xi);
        GridFunction q = q_from_V(V, fr);
        GridFunction V2 = V_from_q(q, fr);
        REQUIRE(V2.size() == V.size());
        for (std::size_t i = 0; i < V.size(); ++i) {
            CHECK(std::abs(V2.node(i) - V.node(i)) <= 1e-12 * V.node(i));
            CHECK(std::abs(V2.value(i) - V.value(i)) <=
                  1e-12 * (std::abs(V.value(i)) + 1e-300));
        }
    }

    SUBCASE("wrong domain rejected") {
        GridFunction wrong({1.0, 2.0}, {0.0, 0.0}, Interp::Linear, Domain::X);
        CHECK_THROWS_AS(q_from_V(wrong, fr), std::invalid_argument);
        GridFunction wrong2({1.0, 2.0}, {0.0, 0.0}, Interp::Linear, Domain::Xi);
        CHECK_THROWS_AS(V_from_q(wrong2, fr), std::invalid_argument);
    }
}

TEST_CASE("effective potential assembly") {
    StarkFrame fr(1.0);

    SUBCASE("free case at alpha=1") {
        EffectivePotential Q = assemble_Q(nullptr, 0.0, fr);
        CHECK(Q(1.0) == doctest::Approx(-5.0 / 36.0).epsilon(1e-15));
        CHECK(Q(2.0) == doctest::Approx(-5.0 / 144.0).epsilon(1e-14));
    }

    SUBCASE("energy term") {
        EffectivePotential Q = assemble_Q(nullptr, 1.0, fr);
        const double expected = -5.0 / 36.0 - std::pow(1.5, -2.0 / 3.0);
        CHECK(Q(1.0) == doctest::Approx(expected).epsilon(1e-14));
    }

    SUBCASE("curvature coefficient across exponents") {
        // -(5 a^2/4 - a(a-1)) / (2+a)^2 evaluated by hand
        StarkFrame f05(0.5);
        EffectivePotential Q05 = assemble_Q(nullptr, 0.0, f05);
        CHECK(Q05(1.0) == doctest::Approx(-0.09).epsilon(1e-14));
        EffectivePotential Q1 = assemble_Q(nullptr, 0.0, fr);
        CHECK(Q1(1.0) == doctest::Approx(-5.0 / 36.0).epsilon(1e-14));
    }

    SUBCASE("vanishes from below at infinity") {
        EffectivePotential Q = assemble_Q(nullptr, 0.0, fr);
        CHECK(Q(1e8) < 0.0);
        CHECK(std::abs(Q(1e8)) < 1e-15);
    }

    SUBCASE("wrong-domain V rejected") {
        auto wrong = std::make_shared<GridFunction>(
            GridFunction({1.0, 2.0}, {0.0, 0.0}, Interp::Linear, Domain::X));
        CHECK_THROWS_AS(assemble_Q(wrong, 0.0, fr), std::invalid_argument);
    }

    SUBCASE("with a sampled perturbation") {
        auto V = std::make_shared<GridFunction>(
            GridFunction({1.0, 10.0}, {0.5, 0.5}, Interp::Linear, Domain::Xi));
        EffectivePotential Q = assemble_Q(V, 0.0, fr);
        CHECK(Q(1.0) == doctest::Approx(-5.0 / 36.0 + 0.5).epsilon(1e-14));
    }
}

TEST_CASE("zero extension of sampled functions") {
    GridFunction f({2.0, 3.0}, {1.0, 0.0}, Interp::Linear, Domain::Xi);
    GridFunction g = extend_with_zeros(f, 1.0, 10.0);
    CHECK(g.front() == 1.0);
    CHECK(g.back() == 10.0);
    CHECK(g(1.5) == 0.0);
    CHECK(g(2.0) == 1.0);
    CHECK(g(5.0) == 0.0);
}
