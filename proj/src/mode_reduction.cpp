#include "endspec/mode_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/interpolators/makima.hpp>

#include "endspec/numerics.hpp"

namespace endspec {

namespace {

std::string num(double x)
{
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

void check_vanishes_beyond(const std::function<double(double)>& f, double support)
{
    for (int i = 1; i <= 1000; ++i) {
        double u = support + 1e-9 + 10.0 * i / 1000.0;
        if (f(u) != 0.0)
            throw DomainError("potential does not vanish beyond its support radius");
    }
}

} // namespace

RadialPotential::RadialPotential() : eval_([](double) { return 0.0; }) {}

RadialPotential::RadialPotential(std::function<double(double)> evaluator, double support_radius,
                                 Smoothness smoothness, std::vector<double> breakpoints, std::string id)
    : eval_(std::move(evaluator)), support_(support_radius), smoothness_(smoothness),
      breakpoints_(std::move(breakpoints)), id_(std::move(id)), zero_(false)
{
    if (!std::isfinite(support_) || support_ < 0.0)
        throw DomainError("potential support must be a finite radius");
    check_vanishes_beyond(eval_, support_);
    std::sort(breakpoints_.begin(), breakpoints_.end());
}

RadialPotential RadialPotential::zero() { return {}; }

RadialPotential RadialPotential::step(double value, double a, double b)
{
    if (!(a >= 0.0 && b > a))
        throw DomainError("step potential needs 0 <= a < b");
    if (value == 0.0)
        return zero();
    RadialPotential p([=](double u) { return (u >= a && u <= b) ? value : 0.0; }, b,
                      Smoothness::piecewise_constant, {a, b},
                      "step(" + num(value) + "," + num(a) + "," + num(b) + ")");
    p.pieces_ = {{a, b, value}};
    return p;
}

RadialPotential RadialPotential::bump(double amplitude, double a, double b)
{
    if (!(a >= 0.0 && b > a))
        throw DomainError("bump potential needs 0 <= a < b");
    if (amplitude == 0.0)
        return zero();
    return {[=](double u) { return amplitude * endspec::bump(a, b, u); }, b, Smoothness::continuous,
            {a, b}, "bump(" + num(amplitude) + "," + num(a) + "," + num(b) + ")"};
}

RadialPotential RadialPotential::tabulated(std::vector<double> u, std::vector<double> v, std::string id)
{
    if (u.size() != v.size() || u.size() < 4)
        throw DomainError("tabulated potential needs at least 4 (u, value) rows");
    for (std::size_t i = 1; i < u.size(); ++i)
        if (!(u[i] > u[i - 1]))
            throw DomainError("tabulated abscissae must be strictly increasing");
    if (u.front() < 0.0)
        throw DomainError("tabulated abscissae must be nonnegative");
    double lo = u.front(), hi = u.back();
    double first = v.front();
    auto spline = std::make_shared<boost::math::interpolators::makima<std::vector<double>>>(
        std::move(u), std::move(v));
    auto f = [spline, lo, hi, first](double x) {
        if (x > hi)
            return 0.0;
        if (x < lo)
            return first;
        return (*spline)(x);
    };
    return {f, hi, Smoothness::continuous, {lo, hi}, "table:" + id};
}

RadialPotential RadialPotential::from_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open potential table " + path.string());
    std::vector<double> u, v;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream row(line);
        double a, b;
        if (!(row >> a))
            continue;
        if (!(row >> b))
            throw DomainError("potential table row needs two columns: " + line);
        u.push_back(a);
        v.push_back(b);
    }
    return tabulated(std::move(u), std::move(v), path.filename().string());
}

double RadialPotential::operator()(double u) const { return zero_ ? 0.0 : eval_(u); }

double RadialPotential::integral(double lo, double hi) const
{
    if (zero_ || hi <= lo)
        return 0.0;
    if (!pieces_.empty()) {
        double s = 0.0;
        for (auto& p : pieces_)
            s += p.value * std::max(0.0, std::min(hi, p.b) - std::max(lo, p.a));
        return s;
    }
    hi = std::min(hi, support_);
    return integrate_split(eval_, lo, hi, breakpoints_);
}

RadialPotential RadialPotential::operator+(const RadialPotential& other) const
{
    if (zero_)
        return other;
    if (other.zero_)
        return *this;
    auto f = eval_, g = other.eval_;
    std::vector<double> bp = breakpoints_;
    bp.insert(bp.end(), other.breakpoints_.begin(), other.breakpoints_.end());
    Smoothness s = (smoothness_ == Smoothness::continuous && other.smoothness_ == Smoothness::continuous)
                       ? Smoothness::continuous
                       : Smoothness::piecewise_constant;
    RadialPotential sum([f, g](double u) { return f(u) + g(u); }, std::max(support_, other.support_), s,
                        bp, id_ + "+" + other.id_);
    if (!pieces_.empty() && !other.pieces_.empty()) {
        sum.pieces_ = pieces_;
        sum.pieces_.insert(sum.pieces_.end(), other.pieces_.begin(), other.pieces_.end());
    }
    return sum;
}

double ModeOperator::first_order_coefficient() const
{
    return kind == ModeKind::cusp ? dimension_n - 2.0 : 0.0;
}

std::string ModeOperator::describe() const
{
    std::ostringstream os;
    os.precision(12);
    if (kind == ModeKind::cylindrical) {
        os << "-d2/du2";
        if (mode_mu != 0.0)
            os << " + " << mode_mu;
        if (!potential.is_zero())
            os << " + V[" << potential.id() << "]";
        return os.str();
    }
    os << "-u^2 d2/du2";
    if (double c = first_order_coefficient(); c != 0.0)
        os << " + " << c << " u d/du";
    if (mode_mu != 0.0)
        os << " + " << mode_mu << " u^2";
    return os.str();
}

std::string ModeOperator::identity() const
{
    std::ostringstream os;
    os.precision(17);
    os << (kind == ModeKind::cusp ? "cusp" : "cyl") << '|' << mode_mu << '|' << dimension_n << '|'
       << potential.id();
    return os.str();
}

std::vector<ModeOperator> reduce_cylindrical(const CrossSectionSpectrum& cs,
                                             const std::map<std::size_t, RadialPotential>& potentials)
{
    for (auto& [index, v] : potentials) {
        if (index >= cs.size())
            throw DomainError("potential assigned to a mode outside the tracked window");
        if (!std::isfinite(v.support_radius()))
            throw DomainError("potential with unbounded support");
    }
    std::vector<ModeOperator> ops;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        auto it = potentials.find(i);
        ModeOperator op{ModeKind::cylindrical, cs.entries()[i].mu, 0,
                        it == potentials.end() ? RadialPotential::zero() : it->second};
        ops.insert(ops.end(), cs.entries()[i].multiplicity, op);
    }
    return ops;
}

std::vector<ModeOperator> reduce_cusp(const CrossSectionSpectrum& cs, int n)
{
    if (n < 2)
        throw DomainError("cusp dimension must be at least 2");
    std::vector<ModeOperator> ops;
    for (auto& e : cs.entries())
        ops.insert(ops.end(), e.multiplicity, ModeOperator{ModeKind::cusp, e.mu, n, RadialPotential::zero()});
    return ops;
}

double LineOperator::potential(double t) const { return constant + exp_coefficient * std::exp(2.0 * t); }

std::string LineOperator::describe() const
{
    std::ostringstream os;
    os.precision(12);
    os << "-d2/dt2 + " << constant;
    if (exp_coefficient != 0.0)
        os << " + " << exp_coefficient << " e^{2t}";
    return os.str();
}

LineOperator cusp_to_schrodinger(const ModeOperator& op)
{
    if (op.kind != ModeKind::cusp)
        throw DomainError("cusp_to_schrodinger needs a cusp mode operator");
    double a = 0.5 * (op.dimension_n - 1);
    return {a * a, op.mode_mu};
}

ModeOperator line_as_mode(const LineOperator& op)
{
    if (op.exp_coefficient != 0.0)
        throw DomainError("only constant line operators can be scaled");
    return {ModeKind::cylindrical, op.constant, 0, RadialPotential::zero()};
}

WarpedProfile WarpedProfile::bump(double r, double amplitude, double a, double b)
{
    WarpedProfile p;
    p.r = r;
    p.support_radius = b;
    p.f = [=](double u) { return r * (1.0 + amplitude * endspec::bump(a, b, u)); };
    p.df = [=](double u) { return r * amplitude * bump_d1(a, b, u); };
    p.d2f = [=](double u) { return r * amplitude * bump_d2(a, b, u); };
    p.id = "warp(" + num(r) + "," + num(amplitude) + "," + num(a) + "," + num(b) + ")";
    return p;
}

RadialPotential warped_product_potential(const WarpedProfile& p, int k)
{
    if (!(p.r > 0.0))
        throw DomainError("profile radius must be positive");
    for (int i = 0; i <= 2000; ++i) {
        double u = p.support_radius * i / 2000.0;
        if (!(p.f(u) > 0.0))
            throw DomainError("warping profile must be positive");
    }
    for (int i = 1; i <= 200; ++i) {
        double u = p.support_radius + 1e-9 + 10.0 * i / 200.0;
        if (p.f(u) != p.r || p.df(u) != 0.0 || p.d2f(u) != 0.0)
            throw DomainError("warping profile is not eventually constant");
    }
    double kk = double(k) * k;
    auto f = p.f, df = p.df, d2f = p.d2f;
    double r = p.r, R = p.support_radius;
    auto v = [=](double u) {
        if (u > R)
            return 0.0;
        double fu = f(u), d1 = df(u), d2 = d2f(u);
        return kk / (fu * fu) - kk / (r * r) + d2 / (2.0 * fu) - d1 * d1 / (4.0 * fu * fu);
    };
    return {v, R, Smoothness::continuous, {}, p.id + ":k=" + std::to_string(k)};
}

} // namespace endspec
