#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "endspec/complex_scaling.hpp"
#include "endspec/mode_reduction.hpp"

namespace endspec {

using SparseMatrixC = Eigen::SparseMatrix<cplx>;

enum class Scheme { fd2, fd4 };

struct Grid1D {
    double L = 12.0;
    int n_points = 400;
    Scheme scheme = Scheme::fd2;

    double h() const { return L / (n_points + 1); }
    void validate() const;
};

// Nodes x[0] = 0 < ... < x.back() = L, Dirichlet at both ends; scaling starts at x[junction].
struct Mesh {
    std::vector<double> x;
    std::size_t junction = 0;
    bool scaled = false;

    std::size_t unknowns() const { return x.size() - 2; }
};

Mesh uniform_mesh(double L, int n_points, double r0, bool scaled);

// Each segment between consecutive anchors gets ceil(len/h) * 2^level equal cells.
Mesh aligned_mesh(std::vector<double> anchors, double r0, double L, double h, int level, bool scaled);

// Three-point scheme on the complex contour: K_jj = 1/h- + 1/h+ + int (mu+V) dz over the dual
// cell, K_j,j+1 = -1/h+, D_j = (h- + h+)/2.  The operator is D^{-1} K.
struct FdSystem {
    std::vector<cplx> diag;
    std::vector<cplx> upper;
    std::vector<cplx> weight;
    std::vector<cplx> z;

    std::size_t size() const { return diag.size(); }
    // D^{-1/2} K D^{-1/2}, complex symmetric
    SparseMatrixC symmetric() const;
    // K - lambda D
    SparseMatrixC pencil(cplx lambda) const;
};

FdSystem assemble(const ModeOperator& op, cplx stretch, const Mesh& mesh);

struct DiscretizedOperator {
    Eigen::MatrixXcd matrix;
    SparseMatrixC sparse;
    std::vector<double> nodes;
    std::vector<cplx> weights;
    std::string grid;
    std::string operator_tag;
    bool real_symmetric = false;
};

DiscretizedOperator discretize(const ScaledModeOperator& op, const Grid1D& grid);
DiscretizedOperator discretize(const ModeOperator& op, const Grid1D& grid);
DiscretizedOperator from_sparse(SparseMatrixC A, std::string tag, bool real_symmetric);

struct EigenPair {
    cplx value;
    double residual = 0.0;
    bool converged = false;
};

std::vector<EigenPair> eig(const DiscretizedOperator& op, double residual_bound = 1e-10);
std::vector<EigenPair> eig(const Eigen::MatrixXcd& matrix, double residual_bound = 1e-10);
// Eigenvalues only; no certificates.
std::vector<cplx> eigenvalues(const DiscretizedOperator& op);

// ||A v - z v|| / ||A|| for the best vector from shifted inverse iteration.
double residual_certificate(const SparseMatrixC& A, double norm_a, cplx z, int seed = 1);

struct RefineOptions {
    int levels = 3;
    double decay_exponent = 36.0;
    double max_exterior = 400.0;
    double acceptance_radius = 0.05;
};

struct RefinedEigenvalue {
    cplx value;
    cplx start;
    std::vector<cplx> level_values;
    double error_estimate = 0.0;
    double residual = 0.0;
    double exterior_length = 0.0;
    bool ok = false;
    std::string note;
};

// Shift-invert Rayleigh iteration on nested aligned meshes, extrapolated in h^2.
RefinedEigenvalue refine_eigenvalue(const ScaledModeOperator& op, cplx guess, double h,
                                    const RefineOptions& options = {});

// Outgoing wavenumber k with Im(k (1+theta)) > 0 for z - mu = k^2.
cplx exterior_wavenumber(cplx z, double mu, cplx stretch);

std::vector<double> potential_anchors(const ModeOperator& op, double r0);

struct ResonanceOptions {
    double rays_tolerance = 0.02;
    double stability_tolerance = 1e-6;
    double residual_bound = 1e-10;
    double energy_window = 40.0;
    double real_tolerance = 1e-7;
    double scaling_radius = 0.0;  // 0: largest potential support, or 1 for free models
    RefineOptions refine;
    bool extrapolate = true;
};

enum class ItemKind { resonance, bound };

struct ResonanceItem {
    cplx z;
    double residual = 0.0;
    double theta_spread = 0.0;
    int multiplicity = 1;
    std::size_t mode = 0;
    double mu = 0.0;
    ItemKind kind = ItemKind::resonance;
    bool ambiguous = false;
    double error_estimate = 0.0;
    std::string method;
};

struct ResonanceSet {
    std::vector<ResonanceItem> items;
    std::vector<std::string> warnings;
    std::string provenance;

    std::vector<ResonanceItem> resonances() const;
    std::vector<ResonanceItem> bound_states() const;
};

double auto_scaling_radius(const std::vector<ModeOperator>& model);

ResonanceSet find_resonances(const std::vector<ModeOperator>& model,
                             const std::vector<ScalingParameter>& thetas, const Grid1D& grid,
                             const ResonanceOptions& options = {});

// Real eigenvalues below the mode threshold, refined; theta may be real (unitary regime).
std::vector<RefinedEigenvalue> bound_states(const ModeOperator& op, const ScalingParameter& theta,
                                            const Grid1D& grid, const ResonanceOptions& options = {});


enum class LineBoundary { dirichlet, neumann };

// Uniform nodes on [t0, t1]; n_points interior nodes, end nodes kept for Neumann ends.
struct LineGrid {
    double t0 = -15.0;
    double t1 = 15.0;
    int n_points = 2000;
    LineBoundary left = LineBoundary::neumann;
    LineBoundary right = LineBoundary::neumann;

    double h() const { return (t1 - t0) / (n_points + 1); }
    void validate() const;
};

// Form discretization of -d2/dt2 + constant + c e^{2t}; real symmetric tridiagonal, sparse only.
DiscretizedOperator discretize_line(const LineOperator& op, const LineGrid& grid);

// The cusp operator itself in t = log u, from its form with weight u^{-n} du on the same nodes.
DiscretizedOperator discretize_cusp(const ModeOperator& op, const LineGrid& grid);

// Lowest `count` eigenvalues of a real symmetric tridiagonal operator (bisection).
std::vector<double> lowest_eigenvalues(const DiscretizedOperator& op, int count);

} // namespace endspec
