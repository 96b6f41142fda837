#include "endspec/lap.hpp"

#include <algorithm>
#include <cmath>

#include <lapacke.h>

#include "endspec/discretize.hpp"
#include "endspec/numerics.hpp"

namespace endspec {

ModeVector ModeVector::plateau(double a, double b, double w, double scale)
{
    if (!(a >= 0.0 && b > a && w > 0.0 && 2.0 * w <= b - a))
        throw DomainError("plateau needs 0 <= a, 2w <= b - a");
    return {[=](double u) { return scale * rho(a, a + w, u) * (1.0 - rho(b - w, b, u)); }, b};
}

std::string to_string(LapVerdict v)
{
    switch (v) {
    case LapVerdict::bounded:
        return "bounded";
    case LapVerdict::growing:
        return "growing";
    default:
        return "inconclusive";
    }
}

namespace {

struct ModeSystem {
    FdSystem sys;
    Eigen::VectorXcd rhs;  // D phi
    double mu = 0.0;
};

std::vector<ModeSystem> prepare(const std::vector<ModeOperator>& model, const std::vector<ModeVector>& phi,
                                const LapOptions& o)
{
    if (model.size() != phi.size())
        throw DomainError("one test function per mode is required");
    if (!in_gamma(o.theta) && !(o.theta.imag() == 0.0 && o.theta.real() >= 0.0))
        throw DomainError("scaling parameter outside the admissible region");
    double r0 = o.scaling_radius;
    if (r0 <= 0.0) {
        r0 = 1.0;
        for (std::size_t i = 0; i < model.size(); ++i) {
            r0 = std::max(r0, model[i].potential.support_radius());
            if (!phi[i].empty())
                r0 = std::max(r0, phi[i].support);
        }
    }
    std::vector<ModeSystem> out;
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (phi[i].empty())
            continue;
        if (phi[i].support > r0 || model[i].potential.support_radius() > r0)
            throw DomainError("test function and potential must lie inside the scaling radius");
        auto anchors = potential_anchors(model[i], r0);
        anchors.push_back(phi[i].support);
        Mesh mesh = aligned_mesh(anchors, r0, r0 + o.exterior, o.h, 0, true);
        ModeSystem m;
        m.sys = assemble(model[i], 1.0 + o.theta, mesh);
        m.mu = model[i].mode_mu;
        m.rhs.resize(m.sys.size());
        for (std::size_t j = 0; j < m.sys.size(); ++j) {
            double u = mesh.x[j + 1];
            m.rhs(j) = u <= phi[i].support ? m.sys.weight[j] * phi[i].f(u) : cplx(0.0);
        }
        out.push_back(std::move(m));
    }
    return out;
}

// <phi, R(z) phi> for one mode: tridiagonal pencil solve with partial pivoting
cplx pair(const ModeSystem& m, cplx z)
{
    const lapack_int n = static_cast<lapack_int>(m.sys.size());
    std::vector<cplx> dl(m.sys.upper), du(m.sys.upper), d(n);
    for (lapack_int j = 0; j < n; ++j)
        d[j] = m.sys.diag[j] - z * m.sys.weight[j];
    std::vector<cplx> x(m.rhs.data(), m.rhs.data() + n);
    auto c = [](std::vector<cplx>& v) { return reinterpret_cast<lapack_complex_double*>(v.data()); };
    lapack_int info = LAPACKE_zgtsv(LAPACK_COL_MAJOR, n, 1, c(dl), c(d), c(du), c(x), n);
    if (info != 0)
        throw NumericalError("resolvent solve failed at z = " + std::to_string(z.real()) + "+i" +
                             std::to_string(z.imag()));
    cplx s = 0.0;
    for (lapack_int j = 0; j < n; ++j)
        s += m.rhs(j) * x[j];
    return s;
}

double density(const std::vector<ModeSystem>& ms, cplx z)
{
    double s = 0.0;
    for (auto& m : ms)
        s += pair(m, z).imag();
    return s;
}

int intervals_for(double a, double b, double eps, int min_points)
{
    int n = std::max(min_points, static_cast<int>(std::ceil(8.0 * (b - a) / eps)));
    return n + (n % 2);
}

} // namespace

double lap_density(const std::vector<ModeOperator>& model, const std::vector<ModeVector>& phi, cplx z,
                   const LapOptions& o)
{
    return density(prepare(model, phi, o), z);
}

LapReport lap_estimate(const std::vector<ModeOperator>& model, const std::vector<ModeVector>& phi, double a, double b,
                       const LapOptions& o)
{
    if (!(o.p > 1.0))
        throw DomainError("p must exceed 1");
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
        throw DomainError("interval must be bounded with a < b");
    if (o.epsilon_grid.empty())
        throw DomainError("empty epsilon grid");
    for (std::size_t k = 0; k < o.epsilon_grid.size(); ++k) {
        double e = o.epsilon_grid[k];
        if (!(e > 0.0 && e < 1.0) || (k > 0 && !(e < o.epsilon_grid[k - 1])))
            throw DomainError("epsilon grid must be strictly decreasing in (0,1)");
    }
    auto ms = prepare(model, phi, o);
    LapReport r;
    r.a = a;
    r.b = b;
    r.p = o.p;
    r.epsilon_grid = o.epsilon_grid;
    for (double eps : o.epsilon_grid) {
        int n = intervals_for(a, b, eps, o.min_points);
        double dx = (b - a) / n;
        std::vector<double> y(n + 1);
        parallel_for(y.size(), [&](std::size_t i) {
            y[i] = std::pow(std::abs(density(ms, cplx(a + i * dx, eps))), o.p);
        });
        double v = simpson(y, dx);
        if (!std::isfinite(v))
            throw NumericalError("non-finite absorption integral");
        r.values.push_back(v);
        r.points.push_back(n);
    }
    r.sup_estimate = *std::max_element(r.values.begin(), r.values.end());
    const auto& v = r.values;
    std::size_t m = v.size();
    if (m >= 3) {
        double hi = std::max({v[m - 1], v[m - 2], v[m - 3]}), lo = std::min({v[m - 1], v[m - 2], v[m - 3]});
        if (hi <= lo * (1.0 + o.flatness) || hi == 0.0)
            r.verdict = LapVerdict::bounded;
    }
    if (v.front() > 0.0 && v.back() / v.front() >= o.growth_ratio)
        r.verdict = LapVerdict::growing;
    return r;
}

double stone_integral(const std::vector<ModeOperator>& model, const std::vector<ModeVector>& phi, double a, double b,
                      double eps, const LapOptions& o)
{
    auto ms = prepare(model, phi, o);
    int n = intervals_for(a, b, eps, o.min_points);
    double dx = (b - a) / n;
    std::vector<double> y(n + 1);
    parallel_for(y.size(), [&](std::size_t i) { y[i] = density(ms, cplx(a + i * dx, eps)); });
    return simpson(y, dx) / M_PI;
}

double stone_projection(const std::vector<ModeOperator>& model, const std::vector<ModeVector>& phi, double a,
                        double b, double L, double h)
{
    if (model.size() != phi.size())
        throw DomainError("one test function per mode is required");
    double total = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (phi[i].empty())
            continue;
        const auto& op = model[i];
        lapack_int n = static_cast<lapack_int>(std::lround(L / h)) - 1;
        std::vector<double> d(n), e(n - 1, -1.0 / (h * h)), f(n);
        for (lapack_int j = 0; j < n; ++j) {
            double u = (j + 1) * h;
            d[j] = 2.0 / (h * h) + op.mode_mu + op.potential.integral(u - 0.5 * h, u + 0.5 * h) / h;
            f[j] = u <= phi[i].support ? phi[i].f(u) : 0.0;
        }
        lapack_int m = 0, nsplit = 0;
        std::vector<double> w(n);
        std::vector<lapack_int> iblock(n), isplit(n);
        lapack_int info = LAPACKE_dstebz('V', 'B', n, a, b, 0, 0, 0.0, d.data(), e.data(), &m, &nsplit, w.data(),
                                         iblock.data(), isplit.data());
        if (info != 0)
            throw NumericalError("bisection for the box spectrum failed");
        if (m == 0)
            continue;
        std::vector<double> z(static_cast<std::size_t>(n) * m);
        std::vector<lapack_int> ifail(m);
        info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), e.data(), m, w.data(), iblock.data(), isplit.data(),
                              z.data(), n, ifail.data());
        if (info != 0)
            throw NumericalError("inverse iteration for box eigenvectors failed");
        for (lapack_int k = 0; k < m; ++k) {
            double c = 0.0;
            for (lapack_int j = 0; j < n; ++j)
                c += f[j] * z[static_cast<std::size_t>(k) * n + j];
            total += h * c * c;
        }
    }
    return total;
}

double free_lap_density(const ModeVector& phi, double x)
{
    if (!(x > 0.0))
        throw DomainError("free density is defined for x > 0");
    double k = std::sqrt(x);
    std::vector<double> cuts;
    for (int i = 1; i < 64; ++i)
        cuts.push_back(phi.support * i / 64.0);
    double s = integrate_split([&](double u) { return phi.f(u) * std::sin(k * u); }, 0.0, phi.support, cuts);
    return s * s / k;
}

} // namespace endspec
