#include "endspec/complex_scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "endspec/numerics.hpp"

namespace endspec {

std::string ScaledModeOperator::form() const
{
    std::ostringstream os;
    os.precision(10);
    cplx p = theta.prime();
    os << "[0," << scaling_radius << "]: " << base.describe() << "; (" << scaling_radius
       << ",inf): -(" << p.real() << (p.imag() < 0 ? "-" : "+") << std::abs(p.imag())
       << "i) d2/du2 + " << base.mode_mu;
    return os.str();
}

ScaledModeOperator dilate_mode(const ModeOperator& op, const ScalingParameter& theta, double r0)
{
    if (op.kind != ModeKind::cylindrical)
        throw DomainError("cusp modes must be reduced to line form before scaling");
    if (!(r0 > 0.0))
        throw DomainError("scaling radius must be positive");
    if (op.potential.support_radius() > r0)
        throw DomainError("potential support exceeds the scaling radius");
    return {op, theta, r0};
}

RaySet essential_rays(const std::vector<Threshold>& thresholds, const ScalingParameter& theta)
{
    if (thresholds.empty())
        throw DomainError("no thresholds given");
    RaySet set;
    for (auto& t : thresholds)
        set.rays.push_back({t.value, theta.direction(), t.label});
    return set;
}

double distance_to_rays(cplx z, const RaySet& rays)
{
    double best = std::numeric_limits<double>::infinity();
    for (auto& r : rays.rays) {
        cplx w = z - r.origin;
        double t = (w * std::conj(r.direction)).real();
        double d = t <= 0.0 ? std::abs(w) : std::abs(w - t * r.direction);
        best = std::min(best, d);
    }
    return best;
}

namespace {

double one_sided_norm2(const std::vector<cplx>& v, double h)
{
    std::vector<double> y(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        y[i] = std::norm(v[i]);
    return simpson(y, h);
}

} // namespace

double DilatedFunction::norm() const { return std::sqrt(one_sided_norm2(left, h) + one_sided_norm2(right, h)); }

double l2_norm(const SampledFunction& f) { return std::sqrt(one_sided_norm2(f.values, f.h)); }

DilatedFunction apply_dilation(const SampledFunction& f, double theta, double r0, double l_target)
{
    if (!(theta >= 0.0))
        throw DomainError("apply_dilation is defined for real theta >= 0");
    if (f.values.size() < 4 || !(f.h > 0.0))
        throw DomainError("sampled function needs at least 4 samples");
    std::size_t junction = static_cast<std::size_t>(std::ceil(r0 / f.h - 1e-9));
    std::size_t last = static_cast<std::size_t>(std::llround(l_target / f.h));
    double rj = junction * f.h;
    if (last <= junction)
        throw DomainError("target length must exceed the scaling radius");
    if (rj + (1.0 + theta) * (last * f.h - rj) > f.length() * (1.0 + 1e-12))
        throw DomainError("sampled grid too short for the requested dilation");

    std::vector<double> re(f.values.size()), im(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        re[i] = f.values[i].real();
        im[i] = f.values[i].imag();
    }
    using boost::math::interpolators::cardinal_cubic_b_spline;
    cardinal_cubic_b_spline<double> sre(re.begin(), re.end(), 0.0, f.h);
    cardinal_cubic_b_spline<double> sim(im.begin(), im.end(), 0.0, f.h);

    DilatedFunction out;
    out.h = f.h;
    out.junction = junction;
    out.left.assign(f.values.begin(), f.values.begin() + junction + 1);
    double scale = std::sqrt(1.0 + theta);
    for (std::size_t j = junction; j <= last; ++j) {
        double w = std::min(rj + (1.0 + theta) * (j * f.h - rj), f.length());
        out.right.push_back(scale * cplx(sre(w), sim(w)));
    }
    return out;
}

} // namespace endspec
