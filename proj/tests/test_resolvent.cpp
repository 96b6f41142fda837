#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "endspec/discretize.hpp"
#include "endspec/numerics.hpp"
#include "endspec/oracle.hpp"
#include "endspec/resolvent.hpp"

using namespace endspec;

namespace {

// inverse of the three-point (-d2 + 1) on (0, L), Dirichlet; the entry at u = v = 1, times 1/h
double dirichlet_inverse_entry(double h, double L)
{
    int n = int(std::lround(L / h)) - 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = 2.0 / (h * h) + 1.0;
        if (i + 1 < n)
            A(i, i + 1) = A(i + 1, i) = -1.0 / (h * h);
    }
    int k = int(std::lround(1.0 / h)) - 1;
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, k);
    Eigen::VectorXd x = A.ldlt().solve(e);
    return x(k) / h;
}

ModeOperator cylinder(double mu, RadialPotential v) { return {ModeKind::cylindrical, mu, 0, std::move(v)}; }

} // namespace

TEST_SUITE("resolvent") {

TEST_CASE("free kernel at lambda = -1")
{
    cplx k = free_mode_kernel({0.0, 1.0}, 1.0, 1.0);
    CHECK(std::abs(k - 0.5 * (1.0 - std::exp(-2.0))) < 1e-15);
    std::vector<cplx> levels;
    for (double h : {0.02, 0.01, 0.005})
        levels.push_back(dirichlet_inverse_entry(h, 20.0));
    CHECK(std::abs(richardson(levels).value - k) < 1e-7);
    CHECK_THROWS_AS(free_mode_kernel(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("free kernel boundary value and symmetry")
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0), re(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        cplx L(re(rng), re(rng));
        double a = u(rng), b = u(rng);
        CHECK(std::abs(free_mode_kernel(L, 0.0, b)) == 0.0);
        CHECK(std::abs(free_mode_kernel(L, a, b) - free_mode_kernel(L, b, a)) == 0.0);
    }
}

TEST_CASE("continuum kernel solves the discrete equation away from the diagonal")
{
    // (-D2 - L^2) applied to a sampled column: O(h^2) off the diagonal, 1/h on it
    for (cplx L : {cplx(0, 1), cplx(2.2, 0.3), cplx(2.2, -0.05)}) {
        double h0 = 0.02, prev = 0.0;
        for (double h : {h0, h0 / 2}) {
            const int n = int(std::lround(6.0 / h));
            const int j = int(std::lround(2.0 / h));
            double worst = 0.0;
            cplx diag = 0.0;
            for (int i = 1; i < n; ++i) {
                auto K = [&](int m) { return free_mode_kernel(L, m * h, j * h); };
                cplx r = (2.0 * K(i) - K(i - 1) - K(i + 1)) / (h * h) - L * L * K(i);
                if (std::abs(i - j) >= 2)
                    worst = std::max(worst, std::abs(r));
                if (i == j)
                    diag = h * r;
            }
            CHECK(std::abs(diag - 1.0) < 5.0 * h * (1.0 + std::norm(L)));
            if (h < h0)
                CHECK(worst < 0.3 * prev);
            prev = worst;
        }
    }
}

TEST_CASE("discrete kernel inverts the three-point matrix")
{
    const double h = 0.05;
    const int n = 400;
    cplx L(0.3, 1.1);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = 2.0 / (h * h) - L * L;
        if (i + 1 < n)
            A(i, i + 1) = A(i + 1, i) = -1.0 / (h * h);
    }
    Eigen::MatrixXcd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            G(i, j) = discrete_free_green(L, h, i + 1, j + 1);
    Eigen::MatrixXcd R = A * G - Eigen::MatrixXcd::Identity(n, n);
    // truncation at the far end only touches the last rows
    CHECK(R.topRows(n - 1).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(discrete_free_green(L, h, 0, 5) == 0.0);
}

TEST_CASE("weighted norms")
{
    SampledFunction chi{1e-4, {}};
    for (int j = 0; j <= 30000; ++j)
        chi.values.push_back(j * 1e-4 <= 1.0 ? 1.0 : 0.0);
    CHECK(weighted_norm(chi, {0.0}) == doctest::Approx(1.0).epsilon(1e-3));

    SampledFunction e{1e-3, {}};
    for (int j = 0; j <= 60000; ++j)
        e.values.push_back(std::exp(-j * 1e-3));
    CHECK(weighted_norm(e, {0.5}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(weighted_norm(e, {1.0}), DomainError);

    double prev = 0.0;
    for (double d : {-0.4, -0.1, 0.0, 0.1, 0.3, 0.45}) {
        double w = weighted_norm(e, {d});
        CHECK(w > prev);
        prev = w;
    }
    CHECK(weighted_norm(e, {0.2}, 2.0) == doctest::Approx(2.0 * weighted_norm(e, {0.2})));
}

TEST_CASE("continued kernel rows live in the weighted dual space")
{
    // second sheet: Im Lambda < 0, rows grow like e^{|Im Lambda| u}
    cplx lambda(5.0, -0.1);
    cplx L = -std::sqrt(lambda);
    if (L.imag() > 0)
        L = -L;
    double growth = -L.imag();
    SampledFunction row{0.01, {}};
    for (int j = 0; j <= 20000; ++j)
        row.values.push_back(free_mode_kernel(L, j * 0.01, 1.0));
    CHECK_NOTHROW(weighted_norm(row, {-(growth + 0.1)}));
    CHECK_THROWS_AS(weighted_norm(row, {-0.5 * growth}), DomainError);
}

TEST_CASE("cutoff algebra")
{
    CutoffFamily c{0.0, 1.0};
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        double x = u(rng);
        CHECK(c(Cutoff::psi1, x) + c(Cutoff::psi2, x) == 1.0);
    }
    CHECK(cutoff_eval(c, Cutoff::phi2, 0.5) == 1.0);
    CHECK(cutoff_eval(c, Cutoff::phi1, 2.0) == 0.0);
    for (double x = 0.0; x <= 3.0; x += 0.001) {
        for (auto w : {Cutoff::phi1, Cutoff::phi2, Cutoff::psi1, Cutoff::psi2}) {
            double v = c(w, x);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(c(Cutoff::phi1, x) * c(Cutoff::psi1, x) == c(Cutoff::psi1, x));
        CHECK(c(Cutoff::phi2, x) * c(Cutoff::psi2, x) == c(Cutoff::psi2, x));
    }
    const double h = 1e-3;
    CHECK(cutoff_gap(c, Cutoff::phi1, Cutoff::psi1, h, 3.0) >= 0.2 - h);
    CHECK(cutoff_gap(c, Cutoff::phi2, Cutoff::psi2, h, 3.0) >= 0.2 - h);

    CutoffFamily shifted{2.0, 0.5};
    CHECK(shifted(Cutoff::phi2, 1.9) == 0.0);
    CHECK(shifted(Cutoff::phi2, 2.2) == 1.0);
    CHECK(shifted(Cutoff::phi1, 2.5) == 0.0);
}

TEST_CASE("smooth step")
{
    double prev = 0.0;
    for (double x = -0.5; x <= 1.5; x += 0.001) {
        double r = rho(0.2, 0.7, x);
        if (x <= 0.2)
            CHECK(r == 0.0);
        if (x >= 0.7)
            CHECK(r == 1.0);
        CHECK(r >= prev);
        prev = r;
    }
    CHECK(smooth_step(0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("parametrix residual is S(Delta - lambda) - Id")
{
    auto cs = make_cross_section("circle", 1.0, 5.0);
    ParametrixAssembler pa(CoreModel::trivial(cs, 0.0), {200, 1.0});
    auto pt = surface_point(-1.0, cs, std::vector<int>(cs.size(), 1));
    auto blocks = pa.blocks(pt);
    REQUIRE(blocks.size() == 3);
    for (std::size_t g = 0; g < blocks.size(); ++g) {
        auto& b = blocks[g];
        Eigen::MatrixXcd D = pa.shifted_operator(g, -1.0);
        Eigen::MatrixXcd G = (b.S * D).topRows(pa.n()) - Eigen::MatrixXcd::Identity(pa.n(), pa.n());
        CHECK((G - b.G).norm() <= 1e-10 * (1.0 + b.G.norm()));
    }
    auto rep = residual_G(pt, CoreModel::trivial(cs, 0.0), {200, 1.0});
    auto sv = rep.singular_values();
    CHECK(std::is_sorted(sv.rbegin(), sv.rend()));
    CHECK(sv.size() == 5u * std::size_t(pa.n()));
}

TEST_CASE("parametrix rows deep in the end are free kernel rows")
{
    auto cs = make_cross_section("point");
    ParametrixAssembler pa(CoreModel::trivial(cs, 0.0), {200, 1.0});
    auto pt = surface_point(-1.0, cs, {1});
    auto b = pa.blocks(pt).at(0);
    const auto& u = pa.nodes();
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (pa.cutoffs()(Cutoff::psi2, u[i]) != 1.0)
            continue;
        for (std::size_t j = 0; j < u.size(); ++j) {
            long I = std::lround(u[i] / pa.h()), J = std::lround(u[j] / pa.h());
            cplx expect = discrete_free_green(b.Lambda, pa.h(), I, J) * pa.cutoffs()(Cutoff::phi2, u[j]);
            CHECK(std::abs(b.S(i, j) - expect) <= 1e-14 * (1.0 + std::abs(expect)));
        }
    }
}

TEST_CASE("parametrix approximates the resolvent away from the collar")
{
    auto cs = make_cross_section("point");
    // long exterior so the box inverse sees almost no reflection from the far end
    ParametrixAssembler pa(CoreModel::trivial(cs, 0.0), {600, 10.0});
    auto b = pa.blocks(surface_point(-1.0, cs, {1})).at(0);
    const int n = pa.n();
    Eigen::MatrixXcd D = pa.shifted_operator(0, -1.0).topRows(n);
    Eigen::MatrixXcd R = D.inverse();
    const auto& u = pa.nodes();
    // rows and columns where both Psi_j and Phi_j are constant
    const double scale = R.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (u[i] > 1.2 && u[j] > 1.2 && u[i] < 3.0 && u[j] < 3.0)
                worst = std::max(worst, std::abs(b.S(i, j) - R(i, j)) / scale);
    CHECK(worst < 1e-6);
}

TEST_CASE("pole search")
{
    SUBCASE("free model has no poles on the second sheet")
    {
        auto core = CoreModel::trivial(make_cross_section("point"), 1.0);
        auto r = pole_search(-1, {{2.0, -0.5}, {6.0, -0.01}}, core, {199, 1.0});
        CHECK(r.poles.empty());
    }
    SUBCASE("barrier resonance")
    {
        cplx oracle = oracle_resonances(RadialPotential::barrier(8, 1, 2), 0.0, 12.0).at(0);
        auto core = CoreModel::single(cylinder(0.0, RadialPotential::barrier(8, 1, 2)), 2.0);
        auto r = pole_search(-1, {{4.5, -0.3}, {5.5, -0.01}}, core, {199, 1.0});
        REQUIRE(r.poles.size() == 1);
        CHECK(std::abs(r.poles[0].z - oracle) <= 1e-5);
        CHECK_FALSE(r.inconclusive);
    }
    SUBCASE("well bound state on the physical sheet")
    {
        double oracle = oracle_bound_states(RadialPotential::well(5, 1)).at(0);
        auto core = CoreModel::single(cylinder(0.0, RadialPotential::well(5, 1)), 1.0);
        auto r = pole_search(1, {{-1.5, -0.3}, {-0.5, 0.3}}, core, {199, 1.0});
        REQUIRE(r.poles.size() == 1);
        CHECK(std::abs(r.poles[0].z - oracle) <= 1e-5);
    }
    SUBCASE("rectangles must avoid thresholds")
    {
        auto core = CoreModel::trivial(make_cross_section("point"), 1.0);
        CHECK_THROWS_AS(pole_search(-1, {{-0.5, -0.5}, {1.0, 0.5}}, core, {199, 1.0}), DomainError);
    }
}

TEST_CASE("sigma min of Id + G drops at a pole")
{
    auto core = CoreModel::single(cylinder(0.0, RadialPotential::well(5, 1)), 1.0);
    ParametrixAssembler pa(core, {199, 1.0});
    double e = oracle_bound_states(RadialPotential::well(5, 1)).at(0);
    auto at = [&](double x) {
        cplx z = x;
        return fredholm_sigma_min({pa.block(0, z, std::sqrt(z))});
    };
    CHECK(at(e) < 0.05 * at(e - 0.3));
    CHECK(at(e) < 0.05 * at(e + 0.3));
}

TEST_CASE("scaled matrix elements equal the unscaled ones")
{
    AnalyticVector f, g;
    f.add(GaussianTail{1, 1, 0.5, 0});
    g.add(GaussianTail{1, 2, 0.3, 0.5}).add(CoreBump{1, 0.2, 0.9, 0.2});
    auto op = cylinder(0.0, RadialPotential::well(5, 1));
    cplx direct = continue_matrix_element(op, f, g, {-2.0}, ScalingParameter::unitary(0.0)).at(0);
    cplx real = continue_matrix_element(op, f, g, {-2.0}, ScalingParameter::unitary(0.3)).at(0);
    cplx complex = continue_matrix_element(op, f, g, {-2.0}, default_theta()).at(0);
    CHECK(std::abs(real - direct) <= 1e-8 * (1.0 + std::abs(direct)));
    CHECK(std::abs(complex - direct) <= 1e-7 * (1.0 + std::abs(direct)));
    CHECK_THROWS_AS(continue_matrix_element(op, f, g, {1.0}, default_theta()), DomainError);
}

TEST_CASE("continued matrix element is smooth across the real axis")
{
    AnalyticVector f, g;
    f.add(GaussianTail{1, 1, 0.5, 0});
    g.add(GaussianTail{1, 1, 0.5, 0});
    auto op = cylinder(0.0, RadialPotential::barrier(3, 0.5, 1));
    std::vector<cplx> path{-1.0};
    // stop above the rotated continuum ray, which crosses Re = 0.5 near Im = -0.22
    for (int k = 0; k < 50; ++k)
        path.push_back({0.5, 0.5 - 0.65 * k / 49.0});
    auto v = continue_matrix_element(op, f, g, path, default_theta());
    for (auto& x : v)
        CHECK(std::isfinite(std::abs(x)));

    // second differences across the axis shrink like d^2; a jump would not shrink
    auto second = [&](double d) {
        auto w = continue_matrix_element(op, f, g, {-1.0, {0.5, d}, 0.5, {0.5, -d}}, default_theta());
        return std::abs(w[1] - 2.0 * w[2] + w[3]);
    };
    double ratio = second(0.01) / second(0.02);
    CHECK(ratio > 0.2);
    CHECK(ratio < 0.3);

    // above the axis the continuation is the resolvent itself; the unscaled box
    // reflects like exp(-2 Im k L), so give it a long exterior
    ContinuationOptions longbox;
    longbox.exterior = 40.0;
    auto direct =
        continue_matrix_element(op, f, g, {-1.0, {0.5, 0.5}}, ScalingParameter::unitary(0.0), longbox);
    CHECK(std::abs(direct[1] - v[1]) <= 1e-7 * (1.0 + std::abs(direct[1])));
}

}
