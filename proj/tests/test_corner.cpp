#include "doctest.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "endspec/corner.hpp"
#include "endspec/oracle.hpp"

using namespace endspec;

namespace {

bool by_value(cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); }

std::vector<cplx> dense_eigs(const SparseMatrixC& a)
{
    Eigen::MatrixXcd m(a);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    std::vector<cplx> v(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
    return v;
}

// pairwise sums of the two axis spectra plus mu, matched against the 2D spectrum
double kronecker_mismatch(const CornerOperator& op, const std::vector<cplx>& two_d)
{
    auto a = dense_eigs(op.a1), b = dense_eigs(op.a2);
    std::vector<cplx> sums;
    for (cplx x : a)
        for (cplx y : b)
            sums.push_back(x + y + op.mu);
    std::vector<bool> used(two_d.size(), false);
    double worst = 0.0;
    for (cplx s : sums) {
        double best = 1e300;
        std::size_t at = 0;
        for (std::size_t i = 0; i < two_d.size(); ++i)
            if (!used[i] && std::abs(two_d[i] - s) < best) {
                best = std::abs(two_d[i] - s);
                at = i;
            }
        used[at] = true;
        worst = std::max(worst, best / (1.0 + std::abs(s)));
    }
    return worst;
}

CornerModel wells(double d1, double d2)
{
    CornerModel m;
    m.v1 = d1 > 0 ? RadialPotential::well(d1, 1) : RadialPotential::zero();
    m.v2 = d2 > 0 ? RadialPotential::well(d2, 1) : RadialPotential::zero();
    m.r0 = 1.0;
    return m;
}

double ground(const CornerModel& m, const Grid2D& g)
{
    auto op = corner_discretize(m, ScalingParameter::unitary(0.0), g, 0);
    return corner_dense_eigenvalues(op).front().real();
}

} // namespace

TEST_SUITE("corner") {

TEST_CASE("model checks")
{
    CornerModel m = wells(5, 0);
    CHECK_NOTHROW(m.validate());
    CHECK(m.separable());
    m.coupling.push_back({0, 1, 0, 1, 0.1});
    CHECK_FALSE(m.separable());
    m.coupling.push_back({0, 2, 0, 1, 0.1});
    CHECK_THROWS_AS(m.validate(), DomainError);
    CornerModel wide = wells(5, 0);
    wide.r0 = 0.5;
    CHECK_THROWS_AS(wide.validate(), DomainError);
    CHECK_THROWS_AS((Grid2D{-1.0, 20}).validate(), DomainError);
    CHECK_THROWS_AS((Grid2D{8.0, 2}).validate(), DomainError);
}

TEST_CASE("Kronecker structure without coupling")
{
    for (auto th : {ScalingParameter::unitary(0.0), default_theta()}) {
        CornerModel m = wells(5, 3);
        Grid2D g{8.0, 40};
        auto op = corner_discretize(m, th, g, 0);
        auto dense = corner_dense_eigenvalues(op);
        CHECK(kronecker_mismatch(op, dense) <= 1e-10);

        auto kron = corner_eigenvalues(m, th, g, 0);
        REQUIRE(kron.size() == dense.size());
        std::sort(kron.begin(), kron.end(), by_value);
        std::sort(dense.begin(), dense.end(), by_value);
        double worst = 0.0;
        for (std::size_t i = 0; i < kron.size(); ++i)
            worst = std::max(worst, std::abs(kron[i] - dense[i]) / (1.0 + std::abs(dense[i])));
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("Kronecker path per cross-section mode")
{
    CornerModel m = wells(5, 0);
    m.y = make_cross_section("circle", 1.0, 4.0);
    Grid2D g{8.0, 30};
    auto th = ScalingParameter::unitary(0.0);
    auto e0 = corner_eigenvalues(m, th, g, 0), e1 = corner_eigenvalues(m, th, g, 1);
    std::sort(e0.begin(), e0.end(), by_value);
    std::sort(e1.begin(), e1.end(), by_value);
    for (std::size_t i = 0; i < e0.size(); ++i)
        CHECK(std::abs(e1[i] - e0[i] - 1.0) < 1e-10 * (1.0 + std::abs(e0[i])));
}

TEST_CASE("lowest eigenvalue of two wells is the sum of the 1D ground states")
{
    Grid2D g{8.0, 40};
    double e2d = ground(wells(5, 5), g);
    double one = ground(wells(5, 0), g);   // e + f
    double none = ground(wells(0, 0), g);  // 2 f
    CHECK(std::abs(e2d - (2.0 * one - none)) < 1e-10);
    double oracle = oracle_bound_states(RadialPotential::well(5, 1)).at(0);
    CHECK(std::abs(e2d - 2.0 * oracle) < 0.05);
}

TEST_CASE("swapping the ends leaves the spectrum alone")
{
    CornerModel m = wells(5, 2);
    m.coupling.push_back({0.0, 1.0, 0.2, 0.8, 0.7});
    Grid2D g{6.0, 30};
    for (auto th : {ScalingParameter::unitary(0.0), default_theta()}) {
        auto a = corner_dense_eigenvalues(corner_discretize(m, th, g, 0));
        auto b = corner_dense_eigenvalues(corner_discretize(m.swapped(), th, g, 0));
        std::sort(a.begin(), a.end(), by_value);
        std::sort(b.begin(), b.end(), by_value);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(a[i] - b[i]) / (1.0 + std::abs(a[i])));
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("small coupling shifts the ground state to first order")
{
    CornerModel m = wells(5, 5);
    Grid2D g{8.0, 40};
    auto op = corner_discretize(m, ScalingParameter::unitary(0.0), g, 0);
    // product ground state from the axis matrices
    Eigen::MatrixXd a1 = Eigen::MatrixXcd(op.a1).real(), a2 = Eigen::MatrixXcd(op.a2).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s1(a1), s2(a2);
    Eigen::VectorXd p1 = s1.eigenvectors().col(0), p2 = s2.eigenvectors().col(0);

    const double eps = 1e-3;
    CornerModel w = m;
    w.coupling.push_back({0.0, 1.0, 0.0, 1.0, eps});
    auto opw = corner_discretize(w, ScalingParameter::unitary(0.0), g, 0);
    // diagonal of the coupling in the same ordering as the 2D unknowns
    Eigen::MatrixXcd D = Eigen::MatrixXcd(opw.sparse) - Eigen::MatrixXcd(op.sparse);
    double predicted = 0.0;
    for (int i = 0; i < op.n1; ++i)
        for (int j = 0; j < op.n2; ++j) {
            long k = long(i) * op.n2 + j;
            predicted += D(k, k).real() * std::pow(p1(i) * p2(j), 2);
        }
    double shift = ground(w, g) - ground(m, g);
    REQUIRE(predicted > 0.0);
    CHECK(std::abs(shift - predicted) <= 0.1 * predicted);
    // the indicator average over the product density is at most 1
    CHECK(predicted <= eps);
}

TEST_CASE("coupled ground state drifts monotonically with the coupling")
{
    CornerModel m = wells(5, 5);
    Grid2D g{8.0, 30};
    double prev = ground(m, g);
    const double step = 0.02;
    for (int k = 1; k <= 8; ++k) {
        CornerModel w = m;
        w.coupling.push_back({0.0, 1.0, 0.0, 1.0, k * step});
        double e = ground(w, g);
        CHECK(e >= prev);
        CHECK(e - prev <= 10.0 * step);
        prev = e;
    }
}

TEST_CASE("channel spectra")
{
    Grid1D g{12.0, 400};
    auto sweep = default_theta_sweep();
    CornerModel free = wells(0, 0);
    free.y = make_cross_section("circle", 1.0, 10.0);
    auto fc = channel_spectra(free, sweep, g);
    CHECK(fc.h3 == std::vector<double>{0, 1, 4, 9});
    CHECK(fc.h1_pp.empty());
    CHECK(fc.h2_pp.empty());
    auto rays = corner_essential_spectrum(free, default_theta(), fc);
    CHECK(rays.rays.size() == 4);

    CornerModel w = wells(5, 0);
    auto wc = channel_spectra(w, sweep, Grid1D{12.0, 800});
    REQUIRE(wc.h1_pp.size() == 1);
    CHECK(wc.h2_pp.empty());
    CHECK(wc.h3 == std::vector<double>{0});
    double e1 = oracle_bound_states(RadialPotential::well(5, 1)).at(0);
    CHECK(std::abs(wc.h1_pp[0].z - e1) < 1e-6);
    for (auto& e : wc.h1_pp)
        CHECK(e.z.imag() <= 1e-7);
    auto wr = corner_essential_spectrum(w, default_theta(), wc);
    REQUIRE(wr.rays.size() == 2);
    for (auto& r : wr.rays)
        CHECK(std::abs(r.direction - default_theta().direction()) < 1e-15);

    // the same bound state at another sweep
    std::vector<ScalingParameter> other{ScalingParameter::make({0.6, 0.2}), ScalingParameter::make({0.55, 0.25}),
                                        ScalingParameter::make({0.6, 0.3})};
    auto wo = channel_spectra(w, other, Grid1D{12.0, 800});
    REQUIRE(wo.h1_pp.size() == 1);
    CHECK(std::abs(wo.h1_pp[0].z - wc.h1_pp[0].z) < 1e-6);

    auto real = corner_essential_spectrum(free, ScalingParameter::unitary(0.4), fc);
    for (auto& r : real.rays)
        CHECK(std::abs(r.direction - 1.0) < 1e-15);
}

TEST_CASE("free 2D scaled spectrum lies on the rays")
{
    CornerModel free = wells(0, 0);
    free.y = make_cross_section("circle", 1.0, 1.5);
    auto th = default_theta();
    Grid2D g{8.0, 40};
    free.r0 = g.h();
    auto rays = corner_essential_spectrum(free, th, channel_spectra(free, {th}, Grid1D{12.0, 400}));
    double tol = std::max(5.0 * g.h() * g.h(), 1e-3);
    std::size_t seen = 0, hit = 0;
    for (std::size_t mode = 0; mode < free.y.size(); ++mode)
        for (cplx z : corner_eigenvalues(free, th, g, mode)) {
            ++seen;
            hit += distance_to_rays(z, rays) <= tol * (1.0 + std::abs(z));
        }
    CHECK(double(hit) >= 0.99 * double(seen));
}

TEST_CASE("free corner has no resonances")
{
    auto rs = corner_resonances(wells(0, 0), default_theta_sweep(), Grid2D{8.0, 30}, Grid1D{12.0, 400});
    CHECK(rs.items.empty());
}

TEST_CASE("separable resonances are sums of channel points")
{
    auto rs = corner_resonances(wells(5, 5), default_theta_sweep(), Grid2D{8.0, 30}, Grid1D{12.0, 800});
    double e1 = oracle_bound_states(RadialPotential::well(5, 1)).at(0);
    REQUIRE(rs.items.size() == 1);
    CHECK(rs.items[0].kind == ItemKind::bound);
    CHECK(std::abs(rs.items[0].z - 2.0 * e1) < 1e-4);
}

TEST_CASE("deepening well accumulates only at the threshold")
{
    std::vector<double> s;
    for (double x = 1.0; x <= 30.0; x += 1.0)
        s.push_back(x);
    auto fam = [](double d) { return wells(d, 0); };
    auto rep = accumulation_check(fam, s, Grid1D{12.0, 400});
    CHECK(rep.ok());
    CHECK(rep.targets == std::vector<double>{0.0});
    CHECK(rep.steps.back().channel_pp.size() >= 2);
    for (auto& b : rep.births)
        CHECK(b.allowed);
}

TEST_CASE("free family has no point spectrum")
{
    std::vector<double> s{1, 2, 3, 4, 5};
    auto rep = accumulation_check([](double) { return wells(0, 0); }, s, Grid1D{12.0, 400});
    CHECK(rep.ok());
    CHECK(rep.births.empty());
    for (auto& st : rep.steps) {
        CHECK(st.channel_pp.empty());
        CHECK(st.full_pp.empty());
    }
}

TEST_CASE("deep double wells stay isolated")
{
    std::vector<double> s;
    for (double x = 1.0; x <= 24.0; x += 1.0)
        s.push_back(x);
    auto rep = accumulation_check([](double d) { return wells(d, d); }, s, Grid1D{12.0, 400});
    CHECK(rep.ok());
    const auto& last = rep.steps.back();
    REQUIRE_FALSE(last.full_pp.empty());
    double e1 = oracle_bound_states(RadialPotential::well(24, 1)).at(0);
    CHECK(std::abs(last.full_pp.front() - 2.0 * e1) < 1e-3);
    // far from the thresholds and from every channel point
    double gap = 1e300;
    for (double c : last.channel_pp)
        gap = std::min(gap, std::abs(last.full_pp.front() - c));
    CHECK(gap > 1.0);
    CHECK(std::abs(last.full_pp.front()) > 1.0);
}

}
