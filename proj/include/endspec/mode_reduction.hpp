#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "endspec/spectral_core.hpp"

namespace endspec {

enum class Smoothness { continuous, piecewise_constant };

struct Piece {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
};

// Compactly supported real potential on the half-line.
class RadialPotential {
public:
    RadialPotential();
    RadialPotential(std::function<double(double)> evaluator, double support_radius,
                    Smoothness smoothness, std::vector<double> breakpoints, std::string id);

    static RadialPotential zero();
    // value on [a, b], zero elsewhere
    static RadialPotential step(double value, double a, double b);
    static RadialPotential well(double depth, double width) { return step(-depth, 0.0, width); }
    static RadialPotential barrier(double height, double a, double b) { return step(height, a, b); }
    static RadialPotential bump(double amplitude, double a, double b);
    // cubic interpolation between samples; zero beyond the last abscissa
    static RadialPotential tabulated(std::vector<double> u, std::vector<double> v, std::string id);
    // two-column text: u value, strictly increasing u, '#' comments
    static RadialPotential from_file(const std::filesystem::path& path);

    double operator()(double u) const;
    double support_radius() const { return support_; }
    Smoothness smoothness() const { return smoothness_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    const std::string& id() const { return id_; }
    bool is_zero() const { return zero_; }

    double integral(double lo, double hi) const;

    RadialPotential operator+(const RadialPotential& other) const;

private:
    std::function<double(double)> eval_;
    double support_ = 0.0;
    Smoothness smoothness_ = Smoothness::continuous;
    std::vector<double> breakpoints_;
    std::vector<Piece> pieces_;
    std::string id_ = "0";
    bool zero_ = true;
};

enum class ModeKind { cylindrical, cusp };

// One transverse mode; Dirichlet condition at u = 0.
struct ModeOperator {
    ModeKind kind = ModeKind::cylindrical;
    double mode_mu = 0.0;
    int dimension_n = 0;
    RadialPotential potential;

    // cusp: -u^2 d2/du2 + c u d/du + mu u^2 with c = n - 2 (self-adjoint for u^{-n} du)
    double first_order_coefficient() const;
    std::string describe() const;
    // key shared by copies that are the same operator
    std::string identity() const;
};

std::vector<ModeOperator> reduce_cylindrical(const CrossSectionSpectrum& cs,
                                             const std::map<std::size_t, RadialPotential>& potentials = {});
std::vector<ModeOperator> reduce_cusp(const CrossSectionSpectrum& cs, int n);

// -d2/dt2 + constant + exp_coefficient * e^{2t} on the line
struct LineOperator {
    double constant = 0.0;
    double exp_coefficient = 0.0;

    double potential(double t) const;
    std::string describe() const;
};

LineOperator cusp_to_schrodinger(const ModeOperator& op);

// Half-line copy [t0, inf) of a line operator with no exponential term, shifted to start at 0.
ModeOperator line_as_mode(const LineOperator& op);

// Surface-of-revolution profile f with f = r constant beyond support_radius.
struct WarpedProfile {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
    double r = 1.0;
    double support_radius = 0.0;
    std::string id;

    // f = r (1 + amplitude * bump on [a, b])
    static WarpedProfile bump(double r, double amplitude, double a, double b);
};

RadialPotential warped_product_potential(const WarpedProfile& profile, int k);

} // namespace endspec
