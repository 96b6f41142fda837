#include "doctest.h"

#include <cmath>
#include <random>

#include "endspec/spectral_core.hpp"

using namespace endspec;

TEST_SUITE("spectral_core") {

TEST_CASE("stock cross-sections")
{
    auto circle = make_cross_section("circle", 1.0, 10.0);
    REQUIRE(circle.size() == 4);
    CHECK(circle.entries()[0].mu == 0.0);
    CHECK(circle.entries()[0].multiplicity == 1);
    for (std::size_t k = 1; k < 4; ++k) {
        CHECK(circle.entries()[k].mu == doctest::Approx(double(k * k)));
        CHECK(circle.entries()[k].multiplicity == 2);
    }
    CHECK(circle.expanded().size() == 7);

    auto half = make_cross_section("circle", 2.0, 10.0);
    CHECK(half.entries()[1].mu == doctest::Approx(0.25));

    auto point = make_cross_section("point");
    REQUIRE(point.size() == 1);
    CHECK(point.entries()[0].mu == 0.0);
    CHECK(point.entries()[0].multiplicity == 1);

    auto interval = make_cross_section("dirichlet-interval", M_PI, 10.0);
    REQUIRE(interval.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(interval.entries()[k].mu == doctest::Approx(double((k + 1) * (k + 1))));
        CHECK(interval.entries()[k].multiplicity == 1);
    }
}

TEST_CASE("cross-section input checks")
{
    CHECK_THROWS_AS(make_cross_section("circle", 0.0), DomainError);
    CHECK_THROWS_AS(make_cross_section("circle", -1.0), DomainError);
    CHECK_THROWS_AS(make_cross_section("torus", 1.0), DomainError);
    CHECK_THROWS_AS(make_cross_section({{1.0, 1}, {0.5, 1}}), DomainError);
    CHECK_THROWS_AS(make_cross_section({{-1.0, 1}}), DomainError);
    CHECK_THROWS_AS(make_cross_section({{0.0, 0}}), DomainError);
    auto ok = make_cross_section({{0.0, 1}, {2.0, 3}});
    CHECK(ok.thresholds() == std::vector<double>{0.0, 2.0});
}

TEST_CASE("admissible scaling region")
{
    CHECK(in_gamma(0.5));
    CHECK_FALSE(in_gamma({0.1, 0.2}));
    CHECK_FALSE(in_gamma({1.0, 0.8}));
    CHECK_FALSE(in_gamma(0.0));
    CHECK_FALSE(in_gamma(-0.3));
    CHECK(in_gamma({0.4, 0.3}));
    for (double t : {1e-6, 0.01, 0.3, 1.0, 10.0, 1e3})
        CHECK(in_gamma(t));
    CHECK_THROWS_AS(ScalingParameter::make({0.1, 0.2}), DomainError);
    CHECK_THROWS_AS(ScalingParameter::unitary(-0.1), DomainError);
    CHECK(ScalingParameter::unitary(0.0).is_real());
}

TEST_CASE("theta prime")
{
    CHECK(std::abs(theta_prime(0.0) - 1.0) == 0.0);
    CHECK(std::abs(theta_prime(1.0) - 0.25) < 1e-15);
    cplx t = theta_prime({0.3, 0.2});
    CHECK(t.real() == doctest::Approx(0.55130).epsilon(1e-4));
    CHECK(t.imag() == doctest::Approx(-0.17375).epsilon(1e-4));
    CHECK_THROWS_AS(theta_prime(-1.0), DomainError);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        cplx z(u(rng), u(rng));
        if (std::abs(z + 1.0) < 1e-3)
            continue;
        CHECK(std::abs(theta_prime(std::conj(z)) - std::conj(theta_prime(z))) <= 1e-14 * std::abs(theta_prime(z)));
        CHECK(std::abs(theta_prime(z) * (1.0 + z) * (1.0 + z) - 1.0) < 1e-13);
    }
    for (double r = 0.0; r < 50.0; r += 0.37) {
        cplx p = theta_prime(r);
        CHECK(p.imag() == 0.0);
        CHECK(p.real() > 0.0);
        CHECK(p.real() <= 1.0);
    }
    auto s = ScalingParameter::make({0.4, 0.3});
    CHECK(std::abs(s.prime() - 1.0 / ((1.0 + s.theta()) * (1.0 + s.theta()))) < 1e-15);
}

TEST_CASE("default sweep lies in the region")
{
    auto sweep = default_theta_sweep();
    CHECK(sweep.size() == 5);
    for (auto& s : sweep)
        CHECK(in_gamma(s.theta()));
    CHECK(in_gamma(default_theta().theta()));
}

TEST_CASE("surface points")
{
    auto p = surface_point(-1.0, {0.0}, {1});
    CHECK(std::abs(p.branches[0] - cplx(0, 1)) < 1e-15);

    auto q = surface_point(-1.0, {0.0, 1.0}, {1, 1});
    CHECK(std::abs(q.branches[0] - cplx(0, 1)) < 1e-15);
    CHECK(std::abs(q.branches[1] - cplx(0, std::sqrt(2.0))) < 1e-15);

    auto r = surface_point(2.0, {0.0, 1.0, 4.0}, {1, 1, 1}, Side::above);
    CHECK(std::abs(r.branches[0] - std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(r.branches[1] - 1.0) < 1e-15);
    CHECK(std::abs(r.branches[2] - cplx(0, std::sqrt(2.0))) < 1e-15);

    auto s = surface_point({-1.0, 0.0}, {0.0}, {-1});
    CHECK(std::abs(s.branches[0] - cplx(0, -1)) < 1e-15);

    CHECK_THROWS_AS(surface_point(1.0, {1.0}, {1}), DomainError);
    CHECK_THROWS_AS(surface_point(2.0, {0.0}, {1}), DomainError);
    CHECK_THROWS_AS(surface_point(-1.0, {0.0, 1.0}, {1}), DomainError);
}

TEST_CASE("branches satisfy the covering relation")
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    std::uniform_int_distribution<int> flag(0, 1);
    auto cs = make_cross_section("circle", 0.7, 40.0);
    for (int i = 0; i < 300; ++i) {
        cplx lambda(u(rng), u(rng));
        std::vector<int> flags(cs.size());
        for (auto& f : flags)
            f = flag(rng) ? 1 : -1;
        auto p = surface_point(lambda, cs, flags);
        CHECK(p.consistency_error() <= 1e-12 * (1.0 + std::abs(lambda)));
        for (std::size_t k = 0; k < flags.size(); ++k)
            CHECK(p.branches[k].imag() * flags[k] > 0.0);
    }
}

}
