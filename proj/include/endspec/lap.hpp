#pragma once

#include <functional>
#include <string>
#include <vector>

#include "endspec/mode_reduction.hpp"
#include "endspec/spectral_core.hpp"

namespace endspec {

// Real test function on [0, support] for one mode.
struct ModeVector {
    std::function<double(double)> f;
    double support = 0.0;

    bool empty() const { return !f || support <= 0.0; }
    // smooth plateau: 1 on [a+w, b-w], 0 outside [a, b]
    static ModeVector plateau(double a, double b, double w, double scale = 1.0);
};

enum class LapVerdict { bounded, growing, inconclusive };
std::string to_string(LapVerdict v);

struct LapOptions {
    std::vector<double> epsilon_grid{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    double p = 2.0;
    double h = 0.02;            // spatial step of the resolvent grid
    double exterior = 20.0;     // scaled exterior length
    int min_points = 200;       // x-quadrature intervals, raised to about 8 per epsilon
    double flatness = 0.02;
    double growth_ratio = 10.0;
    cplx theta{0.4, 0.3};
    double scaling_radius = 0.0;  // 0: largest support of V and phi, at least 1
};

struct LapReport {
    double a = 0.0;
    double b = 0.0;
    double p = 2.0;
    std::vector<double> epsilon_grid;
    std::vector<double> values;
    std::vector<int> points;
    double sup_estimate = 0.0;
    LapVerdict verdict = LapVerdict::inconclusive;
};

// Im <phi, R(z) phi> summed over modes; phi[i] pairs with model[i] (empty entries skipped).
double lap_density(const std::vector<ModeOperator>& model, const std::vector<ModeVector>& phi, cplx z,
                   const LapOptions& options = {});

LapReport lap_estimate(const std::vector<ModeOperator>& model, const std::vector<ModeVector>& phi, double a, double b,
                       const LapOptions& options = {});

// (1/pi) int_a^b Im <phi, R(x + i eps) phi> dx
double stone_integral(const std::vector<ModeOperator>& model, const std::vector<ModeVector>& phi, double a, double b,
                      double eps, const LapOptions& options = {});

// <phi, E_(a,b) phi> from the eigenvectors of the unscaled box [0, L] with eigenvalues in (a, b)
double stone_projection(const std::vector<ModeOperator>& model, const std::vector<ModeVector>& phi, double a,
                        double b, double L = 2000.0, double h = 0.05);

// Free half-line density (int phi sin(sqrt(x) u) du)^2 / sqrt(x), x > 0.
double free_lap_density(const ModeVector& phi, double x);

} // namespace endspec
