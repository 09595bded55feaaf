#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here deliberately avoid the adaptive machinery under test: fixed-step
// midpoint integration and direct state algebra only.

#include <cmath>
#include <complex>
#include <vector>

#include "cohrec/cohrec.hpp"

namespace testsup {

// Published setup: 0.78 um center wavelength, 6.9e12 Hz spread, delta_n 0.01.
inline cohrec::PhysicsParams paper_physics() { return {}; }

inline cohrec::Spectrum paper_spectrum() { return paper_physics().spectrum(); }

inline double paper_gamma(double x_lambda0) {
    return cohrec::gamma_from_retardation(x_lambda0, 0.78e-6).gamma;
}

// Uniform random pure state: b ~ U[0,1], phi ~ U[0, 2pi).
inline cohrec::PureState random_state(cohrec::rng::SplitMix64& gen) {
    const double b = gen.next_double();
    const double phi = cohrec::two_pi * gen.next_double();
    return cohrec::make_pure(b, phi);
}

// Fixed-step midpoint rule over mean +- 8 intensity sd: an oracle for the
// adaptive engine. With n ~ 2^21 the discretization error is far below 1e-10
// for every integrand used in the suites.
template <class F>
double midpoint_spectral_average(F&& g, const cohrec::Spectrum& s, int n = (1 << 21)) {
    const double mean = s.mean();
    const double sd = s.intensity_sd();
    const double lo = mean - 8.0 * sd;
    const double hi = mean + 8.0 * sd;
    const double h = (hi - lo) / n;
    double acc = 0.0;
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = lo + (i + 0.5) * h;
        const double f = s.density(w);
        acc += f * g(w);
        mass += f;
    }
    return acc / mass;
}

// Gaussian spectrum rendered as a table: n points over mean +- 8 sd.
inline cohrec::Spectrum tabulated_gaussian(int n = (1 << 16) + 1) {
    const cohrec::Spectrum g = paper_spectrum();
    const double mean = g.mean();
    const double sd = g.intensity_sd();
    std::vector<double> omega(n);
    std::vector<double> density(n);
    for (int i = 0; i < n; ++i) {
        omega[i] = mean - 8.0 * sd + 16.0 * sd * i / (n - 1);
        density[i] = g.density(omega[i]);
    }
    return cohrec::Spectrum::tabulated(std::move(omega), std::move(density));
}

} // namespace testsup
