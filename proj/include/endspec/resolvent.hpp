#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "endspec/complex_scaling.hpp"
#include "endspec/discretize.hpp"
#include "endspec/mode_reduction.hpp"
#include "endspec/spectral_core.hpp"

namespace endspec {

// (i/(2L)) (e^{iL|u-v|} - e^{iL(u+v)}): Dirichlet half-line kernel of -d2/du2 - L^2.
cplx free_mode_kernel(cplx Lambda, double u, double v);

// Inverse of the three-point half-line matrix (-d2 - L^2) at nodes i h, j h (i, j >= 1).
cplx discrete_free_green(cplx Lambda, double h, long i, long j);

struct WeightedSpaceParam {
    double delta = 0.0;
};

// Squared weighted norm: integral of e^{2 delta u} |f|^2, times the cross-section factor.
// Throws when the last sampling interval carries more than 1e-6 of the total.
double weighted_norm(const SampledFunction& f, WeightedSpaceParam w, double cross_section_factor = 1.0);

enum class Cutoff { phi1, phi2, psi1, psi2 };

// Cutoffs in s = (u - core_radius) / collar; the core itself is s < 0.
struct CutoffFamily {
    double core_radius = 0.0;
    double collar = 1.0;

    double operator()(Cutoff which, double u) const;
};

double cutoff_eval(const CutoffFamily& family, Cutoff which, double u);
// smallest distance between the support of grad Phi_j and supp Psi_j, sampled on a grid of step h
double cutoff_gap(const CutoffFamily& family, Cutoff phi, Cutoff psi, double h, double u_max);

// Modes of the compact core: potential and threshold per mode.
struct CoreModel {
    std::vector<ModeOperator> modes;
    double core_radius = 0.0;
    double collar = 1.0;

    static CoreModel trivial(const CrossSectionSpectrum& cs, double core_radius = 0.0);
    static CoreModel single(const ModeOperator& op, double core_radius);
};

// n interior nodes plus one ghost row; h = collar/q with (n+1) h close to core_radius + collar + extra.
struct ParametrixGrid {
    int n = 300;
    double extra = 1.0;
};

struct ParametrixBlock {
    double mu = 0.0;
    int multiplicity = 1;
    cplx Lambda;
    Eigen::MatrixXcd S;  // (n+1) x (n+1)
    Eigen::MatrixXcd G;  // n x n
};

class ParametrixAssembler {
public:
    ParametrixAssembler(CoreModel core, ParametrixGrid grid);

    double h() const { return h_; }
    int n() const { return n_; }
    const std::vector<double>& nodes() const { return u_; }
    const CutoffFamily& cutoffs() const { return cut_; }

    // one block per distinct mode; Lambda taken from the surface point's branch for that threshold
    std::vector<ParametrixBlock> blocks(const SpectralSurfacePoint& point) const;
    ParametrixBlock block(std::size_t group, cplx lambda, cplx Lambda) const;
    std::size_t groups() const { return group_first_.size(); }
    double group_mu(std::size_t g) const { return core_.modes[group_first_[g]].mode_mu; }

    // discretized (-d2/du2 + mu + V - lambda) on n+1 nodes, last column dropped
    Eigen::MatrixXcd shifted_operator(std::size_t group, cplx lambda) const;

private:
    struct Double {
        Eigen::VectorXd E;
        Eigen::MatrixXd Q;  // rows restricted to the first rows_ nodes
    };
    CoreModel core_;
    CutoffFamily cut_;
    double h_ = 0.0;
    int n_ = 0;
    std::vector<double> u_;
    std::vector<double> phi1_, phi2_, psi1_, psi2_;
    std::vector<std::size_t> group_first_;
    std::vector<int> group_count_;
    std::vector<std::shared_ptr<Double>> doubles_;
    std::vector<std::vector<double>> vcell_;
};

struct ResidualReport {
    std::vector<ParametrixBlock> blocks;

    // singular values of the block-diagonal G, repeated by multiplicity, descending
    std::vector<double> singular_values() const;
    double norm() const;
    Eigen::MatrixXcd dense() const;
};

ResidualReport residual_G(const SpectralSurfacePoint& point, const CoreModel& core, const ParametrixGrid& grid);

// smallest singular value of Id + G over all blocks
double fredholm_sigma_min(const std::vector<ParametrixBlock>& blocks);

struct Rectangle {
    cplx lo;
    cplx hi;

    bool contains(cplx z) const
    {
        return z.real() >= lo.real() && z.real() <= hi.real() && z.imag() >= lo.imag() && z.imag() <= hi.imag();
    }
};

struct PoleSearchOptions {
    int scan_re = 16;
    int scan_im = 16;
    double candidate_level = 0.2;
    int levels = 3;
    double certificate = 1e-8;
    double threshold_margin = 1e-3;
};

struct Pole {
    cplx z;
    std::vector<cplx> level_values;
    double error_estimate = 0.0;
    double sigma_min = 0.0;
    std::size_t group = 0;
    bool certified = false;
};

struct PoleSearchResult {
    std::vector<Pole> poles;
    bool inconclusive = false;
    std::vector<std::string> warnings;
};

// sheet: +1 physical (Im Lambda > 0) or -1 for every mode.
PoleSearchResult pole_search(int sheet, const Rectangle& rect, const CoreModel& core, const ParametrixGrid& grid,
                             const PoleSearchOptions& options = {});

// Members of the analytic-vector family, evaluated at complex points of the contour.
struct GaussianTail {
    double c = 1.0;
    int m = 1;
    double alpha = 1.0;
    double shift = 0.0;
};

// c * (smooth plateau on [a, b]), a plateau rising on [a, a+w] and falling on [b-w, b]
struct CoreBump {
    double c = 1.0;
    double a = 0.0;
    double b = 1.0;
    double w = 0.25;
};

class AnalyticVector {
public:
    AnalyticVector& add(GaussianTail t);
    AnalyticVector& add(CoreBump b);

    cplx operator()(cplx z) const;
    // conj(f(conj z)), the pairing partner on the contour
    cplx reflected(cplx z) const;
    // largest point where a bump term is nonzero (tails are entire)
    double core_extent() const;
    bool empty() const { return tails_.empty() && bumps_.empty(); }

private:
    std::vector<GaussianTail> tails_;
    std::vector<CoreBump> bumps_;
};

struct ContinuationOptions {
    double h = 0.02;
    double scaling_radius = 0.0;  // 0: support of V, at least 1
    double exterior = 20.0;
    int levels = 3;
};

// <R(lambda) f, g> along the path from the scaled resolvent; the path starts with Re lambda < 0.
std::vector<cplx> continue_matrix_element(const ModeOperator& op, const AnalyticVector& f, const AnalyticVector& g,
                                          const std::vector<cplx>& path, const ScalingParameter& theta,
                                          const ContinuationOptions& options = {});

} // namespace endspec
