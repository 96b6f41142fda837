#pragma once

#include <vector>

#include "endspec/mode_reduction.hpp"

namespace endspec {

// Matching-equation oracles for piecewise-constant potentials on the half-line,
// Dirichlet at 0, free beyond the support.

struct Segment {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
};

// Constant pieces covering [0, R]; V sampled at each piece midpoint.
std::vector<Segment> segments_of(const RadialPotential& v);

// psi(0) = 0, psi'(0) = 1 propagated to the outer edge; returns (psi, psi') there.
std::pair<cplx, cplx> propagate(const std::vector<Segment>& segs, cplx k2);

// psi'(R) - i k psi(R); zeros with Im k > 0 are bound states, Im k < 0 resonances.
cplx jost(const std::vector<Segment>& segs, cplx k);

// Bound-state energies mu + k^2 < mu, ascending.
std::vector<double> oracle_bound_states(const RadialPotential& v, double mu = 0.0);

// Resonance energies mu + k^2 with Re k > 0, Im k < 0 and |E| <= window, sorted by Re.
std::vector<cplx> oracle_resonances(const RadialPotential& v, double mu = 0.0, double window = 40.0);

// Newton on the Jost function from a k-plane starting point; returns k.
cplx jost_newton(const std::vector<Segment>& segs, cplx k0, bool* converged = nullptr);

} // namespace endspec
