#include "endspec/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace endspec {

namespace {

double bump_kernel(double t)
{
    if (t <= 0.0 || t >= 1.0)
        return 0.0;
    return std::exp(-1.0 / (t * (1.0 - t)));
}

double kernel_integral(double x)
{
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(bump_kernel, 0.0, x, 12, 1e-15);
}

} // namespace

double smooth_step(double x)
{
    static const double total = kernel_integral(1.0);
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    // the kernel is symmetric about 1/2
    if (x > 0.5)
        return 1.0 - kernel_integral(1.0 - x) / total;
    return kernel_integral(x) / total;
}

double rho(double a, double b, double u) { return smooth_step((u - a) / (b - a)); }

double bump(double a, double b, double u)
{
    double y = (2.0 * u - a - b) / (b - a);
    if (std::abs(y) >= 1.0)
        return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - y * y));
}

double bump_d1(double a, double b, double u)
{
    double y = (2.0 * u - a - b) / (b - a);
    if (std::abs(y) >= 1.0)
        return 0.0;
    double q = 1.0 - y * y;
    double g1 = -2.0 * y / (q * q);
    return bump(a, b, u) * g1 * 2.0 / (b - a);
}

double bump_d2(double a, double b, double u)
{
    double y = (2.0 * u - a - b) / (b - a);
    if (std::abs(y) >= 1.0)
        return 0.0;
    double q = 1.0 - y * y;
    double g1 = -2.0 * y / (q * q);
    double g2 = -2.0 * (1.0 + 3.0 * y * y) / (q * q * q);
    double s = 2.0 / (b - a);
    return bump(a, b, u) * (g1 * g1 + g2) * s * s;
}

template <class T>
static T simpson_impl(const std::vector<T>& y, double h)
{
    std::size_t m = y.size();
    if (m < 2)
        return T(0);
    if (m == 2)
        return 0.5 * h * (y[0] + y[1]);
    std::size_t intervals = m - 1;
    std::size_t end = intervals % 2 == 0 ? m - 1 : m - 4;
    T s(0);
    if (intervals == 1 || (intervals % 2 == 1 && intervals < 3))
        return 0.5 * h * (y[0] + y[1]);
    for (std::size_t i = 0; i + 2 <= end; i += 2)
        s += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
    if (intervals % 2 == 1)
        s += 3.0 * h / 8.0 * (y[end] + 3.0 * y[end + 1] + 3.0 * y[end + 2] + y[end + 3]);
    return s;
}

double simpson(const std::vector<double>& y, double h) { return simpson_impl(y, h); }
cplx simpson(const std::vector<cplx>& y, double h) { return simpson_impl(y, h); }

double integrate_split(const std::function<double(double)>& f, double lo, double hi,
                       const std::vector<double>& breakpoints)
{
    if (!(hi > lo))
        return 0.0;
    std::vector<double> cuts{lo};
    for (double b : breakpoints)
        if (b > lo && b < hi)
            cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += boost::math::quadrature::gauss<double, 10>::integrate(f, cuts[i], cuts[i + 1]);
    return total;
}

namespace {
std::atomic<unsigned> forced_threads{0};
}

void set_thread_count(unsigned n) { forced_threads = n; }

unsigned thread_count()
{
    if (unsigned n = forced_threads.load(); n > 0)
        return n;
    if (const char* env = std::getenv("ENDSPEC_THREADS")) {
        int n = std::atoi(env);
        if (n > 0)
            return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex guard;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(run);
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

Extrapolated richardson(const std::vector<cplx>& levels)
{
    if (levels.empty())
        throw DomainError("nothing to extrapolate");
    std::vector<cplx> row = levels;
    std::vector<cplx> diag{row.back()};
    double f = 4.0;
    while (row.size() > 1) {
        std::vector<cplx> next;
        for (std::size_t i = 0; i + 1 < row.size(); ++i)
            next.push_back((f * row[i + 1] - row[i]) / (f - 1.0));
        row = std::move(next);
        diag.push_back(row.back());
        f *= 4.0;
    }
    double err = diag.size() > 1 ? std::abs(diag.back() - diag[diag.size() - 2]) : 0.0;
    return {diag.back(), err};
}

} // namespace endspec
