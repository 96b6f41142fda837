#pragma once

#include <functional>
#include <string>
#include <vector>

#include "endspec/discretize.hpp"

namespace endspec {

// value on [a1,b1] x [a2,b2]
struct CouplingBox {
    double a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;
    double value = 0.0;
};

// Product corner: -d2/du1^2 - d2/du2^2 + Delta_Y + V1(u1) + V2(u2) + W(u1,u2) on [0,inf)^2 x Y.
struct CornerModel {
    RadialPotential v1;
    RadialPotential v2;
    CrossSectionSpectrum y{{{0.0, 1}}, "point"};
    std::vector<CouplingBox> coupling;
    double r0 = 1.0;

    void validate() const;
    bool separable() const;
    // (Z1, Z2) swapped; W transposed
    CornerModel swapped() const;
    // cell average of W over [lo1,hi1] x [lo2,hi2]
    double coupling_average(double lo1, double hi1, double lo2, double hi2) const;
};

struct ChannelEntry {
    cplx z;
    double mu = 0.0;
    std::string provenance;
};

struct ChannelSpectrum {
    std::vector<double> h3;
    std::vector<ChannelEntry> h1_pp;
    std::vector<ChannelEntry> h2_pp;
};

// pp of -d2/du2 + V_i (bound states and theta-stable resonances), shifted by every mu of Y.
ChannelSpectrum channel_spectra(const CornerModel& model, const std::vector<ScalingParameter>& thetas,
                                const Grid1D& grid, const ResonanceOptions& options = {});

RaySet corner_essential_spectrum(const CornerModel& model, const ScalingParameter& theta,
                                 const ChannelSpectrum& channels);

struct Grid2D {
    double L = 8.0;
    int n = 40;  // per axis

    double h() const { return L / (n + 1); }
    void validate() const;
};

struct CornerOptions {
    std::size_t dense_limit = 2500;
    double stability_tolerance = 1e-4;
    double rays_tolerance = 0.02;
    double energy_window = 40.0;
    int levels = 2;
    double refine_h = 0.1;  // coarsest refinement step
};

// One Y-mode: A1 (x) I + I (x) A2 + mu I + diag(W); `dense` is filled only below the dense limit.
struct CornerOperator {
    SparseMatrixC sparse;
    Eigen::MatrixXcd dense;
    SparseMatrixC a1, a2;
    double mu = 0.0;
    int n1 = 0, n2 = 0;
    bool real_symmetric = false;
    std::string tag;
};

CornerOperator corner_discretize(const CornerModel& model, const ScalingParameter& theta, const Grid2D& grid,
                                 std::size_t mode, const CornerOptions& options = {});

// all eigenvalues of one Y-mode: Kronecker sums when W = 0, dense solve otherwise
std::vector<cplx> corner_eigenvalues(const CornerModel& model, const ScalingParameter& theta, const Grid2D& grid,
                                     std::size_t mode, const CornerOptions& options = {});

// dense 2D solve regardless of separability (below the dense limit)
std::vector<cplx> corner_dense_eigenvalues(const CornerOperator& op);

// complex-symmetric Rayleigh iteration on the sparse 2D operator from a starting value
cplx corner_refine(const SparseMatrixC& A, cplx guess, double* residual = nullptr);

// Separable models: sums of 1D pp points from find_resonances on channel_grid. Otherwise
// per-mode 2D eigenvalues off the corner rays, refined on nested meshes and kept when stable in theta.
ResonanceSet corner_resonances(const CornerModel& model, const std::vector<ScalingParameter>& thetas,
                               const Grid2D& grid, const Grid1D& channel_grid = {12.0, 800},
                               const CornerOptions& options = {}, const ResonanceOptions& channel_options = {});

struct AccumulationStep {
    double parameter = 0.0;
    std::vector<double> channel_pp;  // channels 1 and 2, all Y-modes
    std::vector<double> full_pp;     // discrete eigenvalues of H below its thresholds
};

struct AccumulationEvent {
    double parameter = 0.0;
    double value = 0.0;
    double distance = 0.0;  // to the allowed set
    std::string where;      // "channel" or "H"
    bool allowed = false;
};

struct AccumulationReport {
    std::vector<AccumulationStep> steps;
    std::vector<AccumulationEvent> births;
    std::vector<double> targets;  // allowed-set points where births occurred
    std::vector<std::string> flags;

    bool ok() const { return flags.empty(); }
};

// Tracks real pp eigenvalues along a family; births away from the allowed accumulation set are flagged.
// Separable families only.
AccumulationReport accumulation_check(const std::function<CornerModel(double)>& family,
                                      const std::vector<double>& parameters, const Grid1D& grid,
                                      double birth_tolerance = 0.1, const ResonanceOptions& options = {});

} // namespace endspec
