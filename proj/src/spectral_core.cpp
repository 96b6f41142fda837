#include "endspec/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace endspec {

CrossSectionSpectrum::CrossSectionSpectrum(std::vector<ThresholdEntry> entries, std::string label)
    : entries_(std::move(entries)), label_(std::move(label))
{
    if (entries_.empty())
        throw DomainError("cross-section spectrum is empty");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!(entries_[i].mu >= 0.0))
            throw DomainError("cross-section eigenvalue must be nonnegative");
        if (entries_[i].multiplicity < 1)
            throw DomainError("multiplicity must be at least 1");
        if (i > 0 && !(entries_[i].mu > entries_[i - 1].mu))
            throw DomainError("cross-section eigenvalues must be strictly increasing");
    }
}

std::vector<double> CrossSectionSpectrum::expanded() const
{
    std::vector<double> out;
    for (auto& e : entries_)
        out.insert(out.end(), e.multiplicity, e.mu);
    return out;
}

std::vector<double> CrossSectionSpectrum::thresholds() const
{
    std::vector<double> out;
    for (auto& e : entries_)
        out.push_back(e.mu);
    return out;
}

CrossSectionSpectrum make_cross_section(std::string_view kind, double parameter, double e_max)
{
    std::vector<ThresholdEntry> list;
    if (kind == "point") {
        list.push_back({0.0, 1});
        return {list, "point"};
    }
    if (!(parameter > 0.0))
        throw DomainError("geometric parameter must be positive");
    if (kind == "circle") {
        for (int k = 0;; ++k) {
            double mu = k * k / (parameter * parameter);
            if (mu > e_max && k > 0)
                break;
            list.push_back({mu, k == 0 ? 1 : 2});
        }
        return {list, "circle radius " + std::to_string(parameter)};
    }
    if (kind == "dirichlet-interval") {
        for (int k = 1;; ++k) {
            double mu = std::pow(k * std::numbers::pi / parameter, 2);
            if (mu > e_max && k > 1)
                break;
            list.push_back({mu, 1});
        }
        return {list, "interval length " + std::to_string(parameter) + " Dirichlet"};
    }
    throw DomainError("unknown cross-section kind '" + std::string(kind) + "'");
}

CrossSectionSpectrum make_cross_section(std::vector<ThresholdEntry> explicit_list)
{
    return {std::move(explicit_list), "explicit list"};
}

bool in_gamma(cplx theta)
{
    double t0 = theta.real(), t1 = theta.imag();
    return t0 > 0.0 && t0 > std::abs(t1) && t1 * t1 < 0.5;
}

cplx theta_prime(cplx theta)
{
    if (theta == cplx(-1.0, 0.0))
        throw DomainError("theta = -1 is a pole of theta'");
    cplx s = theta + 1.0;
    return 1.0 / (s * s);
}

ScalingParameter ScalingParameter::make(cplx theta)
{
    if (!in_gamma(theta))
        throw DomainError("scaling parameter outside the admissible region");
    return {theta, theta_prime(theta)};
}

ScalingParameter ScalingParameter::unitary(double theta)
{
    if (!(theta >= 0.0))
        throw DomainError("unitary scaling parameter must be real and >= 0");
    return {cplx(theta, 0.0), theta_prime(theta)};
}

ScalingParameter default_theta() { return ScalingParameter::make({0.4, 0.3}); }

std::vector<ScalingParameter> default_theta_sweep()
{
    return {ScalingParameter::make({0.35, 0.25}), ScalingParameter::make({0.4, 0.3}),
            ScalingParameter::make({0.45, 0.35}), ScalingParameter::make({0.5, 0.3}),
            ScalingParameter::make({0.4, 0.35})};
}

double SpectralSurfacePoint::consistency_error() const
{
    double err = 0.0;
    for (std::size_t i = 0; i < branches.size(); ++i)
        err = std::max(err, std::abs(branches[i] * branches[i] + thresholds[i] - lambda));
    return err;
}

SpectralSurfacePoint surface_point(cplx lambda, const std::vector<double>& thresholds,
                                   const std::vector<int>& sheet_flags, Side side)
{
    if (thresholds.size() != sheet_flags.size())
        throw DomainError("one sheet flag per threshold required");
    SpectralSurfacePoint p{lambda, thresholds, {}, sheet_flags};
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (sheet_flags[i] != 1 && sheet_flags[i] != -1)
            throw DomainError("sheet flags must be +1 or -1");
        cplx w = lambda - thresholds[i];
        if (w == cplx(0.0, 0.0))
            throw DomainError("lambda sits on a branch point");
        cplx r = std::sqrt(w);
        if (r.imag() == 0.0) {
            // on the cut [mu, inf): resolve by the side of approach
            if (side == Side::none)
                throw DomainError("lambda on a branch cut needs an explicit side");
            double s = (side == Side::above) ? 1.0 : -1.0;
            p.branches.push_back(s * sheet_flags[i] * r);
            continue;
        }
        if ((r.imag() > 0.0) != (sheet_flags[i] > 0))
            r = -r;
        p.branches.push_back(r);
    }
    return p;
}

SpectralSurfacePoint surface_point(cplx lambda, const CrossSectionSpectrum& cs,
                                   const std::vector<int>& sheet_flags, Side side)
{
    return surface_point(lambda, cs.thresholds(), sheet_flags, side);
}

} // namespace endspec
