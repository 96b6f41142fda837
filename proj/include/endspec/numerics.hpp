#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "endspec/spectral_core.hpp"

namespace endspec {

// C-infinity step: 0 for x <= 0, 1 for x >= 1, built from the bump exp(-1/(x(1-x))).
double smooth_step(double x);
// smooth_step rescaled to [a, b]
double rho(double a, double b, double u);

// C-infinity bump on [a, b], value 1 at the midpoint; first and second derivatives.
double bump(double a, double b, double u);
double bump_d1(double a, double b, double u);
double bump_d2(double a, double b, double u);

// Composite Simpson over equispaced samples; a 3/8 panel closes odd interval counts.
double simpson(const std::vector<double>& y, double h);
cplx simpson(const std::vector<cplx>& y, double h);

// Integral of f over [lo, hi], split at the given breakpoints; Gauss-Legendre per piece.
double integrate_split(const std::function<double(double)>& f, double lo, double hi,
                       const std::vector<double>& breakpoints);

struct Extrapolated {
    cplx value;
    double error = 0.0;  // distance to the previous order
};

// Values on grids h, h/2, h/4, ... with an even error expansion in h.
Extrapolated richardson(const std::vector<cplx>& levels);

// Global worker count: set_thread_count wins, then ENDSPEC_THREADS, then hardware.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace endspec
