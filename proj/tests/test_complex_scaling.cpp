#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "endspec/complex_scaling.hpp"
#include "endspec/discretize.hpp"

using namespace endspec;

namespace {

std::vector<double> real_below(const std::vector<cplx>& zs, double cut)
{
    std::vector<double> out;
    for (cplx z : zs)
        if (z.real() < cut && std::abs(z.imag()) < 1e-8)
            out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_SUITE("complex_scaling") {

TEST_CASE("exterior coefficients")
{
    ModeOperator free0{ModeKind::cylindrical, 0.0, 0, RadialPotential::zero()};
    auto id = dilate_mode(free0, ScalingParameter::unitary(0.0), 1.0);
    CHECK(id.exterior_coefficient() == cplx(1.0, 0.0));

    ModeOperator free1{ModeKind::cylindrical, 1.0, 0, RadialPotential::zero()};
    auto s = dilate_mode(free1, ScalingParameter::make({0.3, 0.2}), 1.0);
    CHECK(s.exterior_coefficient().real() == doctest::Approx(0.5513).epsilon(1e-3));
    CHECK(s.exterior_coefficient().imag() == doctest::Approx(-0.1737).epsilon(1e-3));
    CHECK(s.exterior_potential() == 1.0);

    ModeOperator well{ModeKind::cylindrical, 0.0, 0, RadialPotential::well(5, 1)};
    auto w = dilate_mode(well, default_theta(), 2.0);
    for (double u : {0.1, 0.5, 0.99})
        CHECK(w.base.potential(u) == -5.0);
    CHECK_THROWS_AS(dilate_mode(well, default_theta(), 0.5), DomainError);
    CHECK_THROWS_AS(dilate_mode({ModeKind::cusp, 0.0, 2, RadialPotential::zero()}, default_theta(), 1.0),
                    DomainError);
}

TEST_CASE("rays")
{
    auto real = essential_rays({{0.0, "a"}, {1.0, "b"}, {4.0, "c"}}, ScalingParameter::unitary(0.3));
    REQUIRE(real.rays.size() == 3);
    for (auto& r : real.rays)
        CHECK(std::abs(r.direction - 1.0) < 1e-15);

    auto th = ScalingParameter::make({0.3, 0.2});
    auto one = essential_rays({{0.0, "mu=0"}}, th);
    CHECK(std::arg(one.rays[0].direction) * 180.0 / M_PI == doctest::Approx(-17.49).epsilon(1e-3));

    auto two = essential_rays({{-3.2, "channel"}, {0.0, "mu=0"}}, default_theta());
    REQUIRE(two.rays.size() == 2);
    CHECK(two.rays[0].source == "channel");
    CHECK(two.rays[1].source == "mu=0");
    for (auto& r : two.rays)
        CHECK(std::abs(r.direction - default_theta().direction()) < 1e-15);

    CHECK_THROWS_AS(essential_rays({}, default_theta()), DomainError);
}

TEST_CASE("distance to rays")
{
    auto flat = essential_rays({{0.0, ""}}, ScalingParameter::unitary(0.0));
    CHECK(distance_to_rays(3.0, flat) == 0.0);
    CHECK(distance_to_rays(-1.0, flat) == doctest::Approx(1.0));
    CHECK(distance_to_rays({2.0, 0.5}, flat) == doctest::Approx(0.5));

    RaySet diag{{{0.0, std::polar(1.0, -M_PI / 4), ""}}};
    cplx z(1.0, -0.5);
    // projection onto the unit direction (1, -1)/sqrt 2
    double t = (1.0 + 0.5) / std::sqrt(2.0);
    double expected = std::hypot(1.0 - t / std::sqrt(2.0), -0.5 + t / std::sqrt(2.0));
    CHECK(distance_to_rays(z, diag) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(distance_to_rays(std::polar(5.0, -M_PI / 4), diag) < 1e-14);
}

TEST_CASE("dilation by zero is the identity")
{
    SampledFunction f{0.01, {}};
    for (int j = 0; j <= 1000; ++j)
        f.values.push_back(std::exp(-std::pow(j * 0.01 - 3.0, 2)));
    auto g = apply_dilation(f, 0.0, 1.0, 8.0);
    for (std::size_t j = 0; j <= 800; ++j)
        CHECK(std::abs(g.at(j) - f.values[j]) < 1e-12);
}

TEST_CASE("dilation leaves the interior alone")
{
    SampledFunction f{0.01, {}};
    for (int j = 0; j <= 1000; ++j) {
        double u = j * 0.01;
        f.values.push_back(u < 0.8 ? std::sin(M_PI * u / 0.8) : 0.0);
    }
    auto g = apply_dilation(f, 0.7, 1.0, 5.0);
    for (std::size_t j = 0; j <= 500; ++j)
        CHECK(std::abs(g.at(j) - (j < 100 ? f.values[j] : cplx(0.0))) < 1e-12);
}

TEST_CASE("dilation preserves the norm of a gaussian tail")
{
    SampledFunction f{0.002, {}};
    for (int j = 0; j <= 10000; ++j)
        f.values.push_back(std::exp(-std::pow(j * 0.002 - 3.0, 2)));
    auto g = apply_dilation(f, 0.5, 1.0, 10.0 / 1.5);
    CHECK(g.norm() / l2_norm(f) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(apply_dilation(f, 0.5, 1.0, 15.0), DomainError);
    CHECK_THROWS_AS(apply_dilation(f, -0.1, 1.0, 5.0), DomainError);
}

TEST_CASE("real scaling leaves bound states fixed")
{
    ModeOperator well{ModeKind::cylindrical, 0.0, 0, RadialPotential::well(25, 1)};
    Grid1D coarse{12.0, 599}, fine{12.0, 1199};
    auto ref = real_below(eigenvalues(discretize(well, fine)), 0.0);
    auto ref_coarse = real_below(eigenvalues(discretize(well, coarse)), 0.0);
    REQUIRE(ref.size() == 2);
    REQUIRE(ref_coarse.size() == 2);
    for (double t : {0.1, 0.3, 1.0}) {
        auto th = ScalingParameter::unitary(t);
        auto scaled = real_below(eigenvalues(discretize(dilate_mode(well, th, 1.0), fine)), 0.0);
        REQUIRE(scaled.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(scaled[i] - ref[i]) <= 10.0 * std::abs(ref[i] - ref_coarse[i]));
    }
}

TEST_CASE("free scaled spectrum lies on the rotated ray")
{
    // scaled from the first node on, the box keeps the direction of theta'
    auto th = default_theta();
    ModeOperator free0{ModeKind::cylindrical, 0.0, 0, RadialPotential::zero()};
    Grid1D g{12.0, 400};
    auto ev = eigenvalues(discretize(dilate_mode(free0, th, g.h()), g));
    auto rays = essential_rays({{0.0, "mu=0"}}, th);
    double tol = std::max(5.0 * g.h() * g.h(), 1e-3);
    std::size_t hit = 0;
    for (cplx z : ev)
        hit += distance_to_rays(z, rays) <= tol * (1.0 + std::abs(z));
    CHECK(double(hit) >= 0.99 * double(ev.size()));
}

TEST_CASE("an unscaled interior tilts the truncated cloud")
{
    // box eigenvalues (m pi / l)^2 with the complex length l = R0 + (1 + theta)(L - R0)
    auto th = default_theta();
    ModeOperator free0{ModeKind::cylindrical, 0.0, 0, RadialPotential::zero()};
    Grid1D g{12.0, 400};
    const double r0 = 1.0;
    cplx len = r0 + (1.0 + th.theta()) * (g.L - r0);
    RaySet box{{{0.0, std::polar(1.0, -2.0 * std::arg(len)), "box"}}};
    auto ev = eigenvalues(discretize(dilate_mode(free0, th, r0), g));
    std::size_t near_box = 0, near_theory = 0, low = 0;
    auto rays = essential_rays({{0.0, "mu=0"}}, th);
    for (cplx z : ev) {
        if (std::abs(z) > 5.0)
            continue;
        ++low;
        near_box += distance_to_rays(z, box) <= 1e-3 * (1.0 + std::abs(z));
        near_theory += distance_to_rays(z, rays) <= 1e-3 * (1.0 + std::abs(z));
    }
    REQUIRE(low > 5);
    CHECK(double(near_box) >= 0.99 * double(low));
    CHECK(near_theory < near_box);
}

TEST_CASE("rays move with theta, ray origins do not")
{
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int i = 0; i < 50; ++i) {
        double t0 = u(rng);
        double t1 = (2.0 * u(rng) - 1.0) * std::min(t0, 0.7);
        if (!in_gamma({t0, t1}))
            continue;
        auto th = ScalingParameter::make({t0, t1});
        auto rs = essential_rays({{0.0, ""}, {2.5, ""}}, th);
        CHECK(rs.rays[1].origin == cplx(2.5));
        CHECK(std::abs(std::abs(rs.rays[0].direction) - 1.0) < 1e-15);
        CHECK(std::abs(rs.rays[0].direction - th.prime() / std::abs(th.prime())) < 1e-15);
    }
}

}
