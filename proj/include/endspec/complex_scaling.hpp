#pragma once

#include <string>
#include <vector>

#include "endspec/mode_reduction.hpp"
#include "endspec/spectral_core.hpp"

namespace endspec {

// -d2/du2 + mu + V on [0, R0]; -theta' d2/du2 + mu beyond R0.
struct ScaledModeOperator {
    ModeOperator base;
    ScalingParameter theta;
    double scaling_radius;

    cplx exterior_coefficient() const { return theta.prime(); }
    double exterior_potential() const { return base.mode_mu; }
    std::string form() const;
};

ScaledModeOperator dilate_mode(const ModeOperator& op, const ScalingParameter& theta, double r0);

struct Threshold {
    cplx value;
    std::string label;
};

struct Ray {
    cplx origin;
    cplx direction;
    std::string source;
};

struct RaySet {
    std::vector<Ray> rays;
};

RaySet essential_rays(const std::vector<Threshold>& thresholds, const ScalingParameter& theta);
double distance_to_rays(cplx z, const RaySet& rays);

// Samples f(j h), j = 0..N-1.
struct SampledFunction {
    double h = 0.0;
    std::vector<cplx> values;

    double length() const { return h * (values.size() - 1); }
};

// Dilated image on [0, L_target]; jump at node `junction` kept as separate one-sided values.
struct DilatedFunction {
    double h = 0.0;
    std::size_t junction = 0;
    std::vector<cplx> left;   // nodes 0..junction
    std::vector<cplx> right;  // nodes junction..end

    double norm() const;
    cplx at(std::size_t j) const { return j < junction ? left[j] : right[j - junction]; }
};

DilatedFunction apply_dilation(const SampledFunction& f, double theta, double r0, double l_target);
double l2_norm(const SampledFunction& f);

} // namespace endspec
