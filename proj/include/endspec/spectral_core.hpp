#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace endspec {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input or violated precondition.
class DomainError : public Error {
public:
    using Error::Error;
};

// Grid resolution below the supported range; callers may choose to proceed.
class GridWarning : public DomainError {
public:
    using DomainError::DomainError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

struct ThresholdEntry {
    double mu = 0.0;
    int multiplicity = 1;
};

// Spectrum of the cross-section Laplacian, truncated to a finite energy window.
class CrossSectionSpectrum {
public:
    CrossSectionSpectrum(std::vector<ThresholdEntry> entries, std::string label);

    const std::vector<ThresholdEntry>& entries() const { return entries_; }
    const std::string& label() const { return label_; }
    std::size_t size() const { return entries_.size(); }

    // thresholds repeated according to multiplicity
    std::vector<double> expanded() const;
    std::vector<double> thresholds() const;

private:
    std::vector<ThresholdEntry> entries_;
    std::string label_;
};

// kind: "point", "circle" (parameter = radius), "dirichlet-interval" (parameter = length).
CrossSectionSpectrum make_cross_section(std::string_view kind, double parameter = 0.0,
                                        double e_max = 10.0);
CrossSectionSpectrum make_cross_section(std::vector<ThresholdEntry> explicit_list);

bool in_gamma(cplx theta);
cplx theta_prime(cplx theta);

class ScalingParameter {
public:
    // theta must lie in the admissible open region
    static ScalingParameter make(cplx theta);
    // theta real and >= 0
    static ScalingParameter unitary(double theta);

    cplx theta() const { return theta_; }
    cplx prime() const { return prime_; }
    cplx direction() const { return prime_ / std::abs(prime_); }
    bool is_real() const { return theta_.imag() == 0.0; }

private:
    ScalingParameter(cplx t, cplx p) : theta_(t), prime_(p) {}
    cplx theta_;
    cplx prime_;
};

ScalingParameter default_theta();
std::vector<ScalingParameter> default_theta_sweep();

enum class Side { none, above, below };

struct SpectralSurfacePoint {
    cplx lambda;
    std::vector<double> thresholds;
    std::vector<cplx> branches;
    std::vector<int> sheet_flags;

    double consistency_error() const;
};

// +1 selects Im Lambda > 0 (physical), -1 selects Im Lambda < 0.
SpectralSurfacePoint surface_point(cplx lambda, const std::vector<double>& thresholds,
                                   const std::vector<int>& sheet_flags, Side side = Side::none);
SpectralSurfacePoint surface_point(cplx lambda, const CrossSectionSpectrum& cs,
                                   const std::vector<int>& sheet_flags, Side side = Side::none);

} // namespace endspec
