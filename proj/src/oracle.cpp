#include "endspec/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

namespace endspec {

std::vector<Segment> segments_of(const RadialPotential& v)
{
    double R = v.support_radius();
    std::vector<double> cuts{0.0};
    for (double b : v.breakpoints())
        if (b > 0.0 && b < R)
            cuts.push_back(b);
    cuts.push_back(R);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Segment> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        if (b - a < 1e-14)
            continue;
        out.push_back({a, b, v.integral(a, b) / (b - a)});
    }
    return out;
}

std::pair<cplx, cplx> propagate(const std::vector<Segment>& segs, cplx k2)
{
    cplx p = 0.0, dp = 1.0;
    for (auto& s : segs) {
        double d = s.b - s.a;
        cplx q = std::sqrt(k2 - s.value);
        cplx c = std::cos(q * d);
        cplx sinc = std::abs(q) < 1e-12 ? cplx(d) : std::sin(q * d) / q;
        cplx qs = -(k2 - s.value) * sinc;  // -q sin(qd)
        cplx np = c * p + sinc * dp;
        cplx ndp = qs * p + c * dp;
        p = np;
        dp = ndp;
    }
    return {p, dp};
}

cplx jost(const std::vector<Segment>& segs, cplx k)
{
    auto [p, dp] = propagate(segs, k * k);
    return dp - cplx(0, 1) * k * p;
}

cplx jost_newton(const std::vector<Segment>& segs, cplx k, bool* converged)
{
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
        cplx f = jost(segs, k);
        double e = 1e-7 * (1.0 + std::abs(k));
        cplx df = (jost(segs, k + e) - jost(segs, k - e)) / (2.0 * e);
        if (df == 0.0)
            break;
        cplx step = f / df;
        k -= step;
        if (!std::isfinite(k.real()) || !std::isfinite(k.imag()))
            break;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(k))) {
            ok = true;
            break;
        }
    }
    if (converged)
        *converged = ok;
    return k;
}

std::vector<double> oracle_bound_states(const RadialPotential& v, double mu)
{
    auto segs = segments_of(v);
    double vmin = 0.0;
    for (auto& s : segs)
        vmin = std::min(vmin, s.value);
    std::vector<double> out;
    if (vmin >= 0.0)
        return out;
    // k = i kappa: real matching function psi' + kappa psi
    auto f = [&](double kappa) {
        auto [p, dp] = propagate(segs, cplx(-kappa * kappa));
        return (dp + kappa * p).real();
    };
    double top = std::sqrt(-vmin);
    const int N = 20000;
    double prev = f(top * 1e-9);
    double x0 = top * 1e-9;
    for (int i = 1; i <= N; ++i) {
        double x1 = top * i / N;
        double cur = f(x1);
        if ((prev < 0) != (cur < 0)) {
            boost::uintmax_t iters = 200;
            auto r = boost::math::tools::toms748_solve(f, x0, x1, prev, cur,
                                                       boost::math::tools::eps_tolerance<double>(52), iters);
            double kappa = 0.5 * (r.first + r.second);
            out.push_back(mu - kappa * kappa);
        }
        prev = cur;
        x0 = x1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<cplx> oracle_resonances(const RadialPotential& v, double mu, double window)
{
    auto segs = segments_of(v);
    std::vector<cplx> ks;
    if (segs.empty())
        return {};
    double kmax = std::sqrt(window) + 1.0;
    for (double re = 0.1; re <= kmax; re += 0.2)
        for (double im = -0.05; im >= -4.0; im -= 0.25) {
            bool ok = false;
            cplx k = jost_newton(segs, {re, im}, &ok);
            if (!ok || k.real() <= 1e-8 || k.imag() >= -1e-12)
                continue;
            if (std::abs(mu + k * k) > window)
                continue;
            bool dup = false;
            for (cplx q : ks)
                dup = dup || std::abs(q - k) < 1e-8 * (1.0 + std::abs(k));
            if (!dup)
                ks.push_back(k);
        }
    std::vector<cplx> out;
    for (cplx k : ks)
        out.push_back(mu + k * k);
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    return out;
}

} // namespace endspec
