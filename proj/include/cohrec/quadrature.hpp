#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cohrec/errors.hpp"
#include "cohrec/spectrum.hpp"

namespace cohrec {

namespace detail {

struct QuadSegment {
    double a;
    double b;
    double fa;
    double fm;
    double fb;
    double simpson;
};

template <class F>
QuadSegment make_segment(F& f, double a, double b) {
    const double m = 0.5 * (a + b);
    QuadSegment s{a, b, f(a), f(m), f(b), 0.0};
    s.simpson = (b - a) / 6.0 * (s.fa + 4.0 * s.fm + s.fb);
    return s;
}

/// Iterative adaptive Simpson with interval-halving error estimates.
/// Returns the integral estimate; accumulates the achieved error bound.
/// Throws numeric_error once the interval budget is exhausted and the
/// drained bound exceeds the requested tolerance.
template <class F>
double adaptive_simpson(F&& f, double lo, double hi, double tol,
                        std::size_t budget = (std::size_t{1} << 20)) {
    const double width = hi - lo;
    constexpr int initial_panels = 64;

    std::vector<QuadSegment> stack;
    stack.reserve(256);
    for (int i = 0; i < initial_panels; ++i) {
        const double a = lo + width * i / initial_panels;
        const double b = lo + width * (i + 1) / initial_panels;
        stack.push_back(make_segment(f, a, b));
    }

    double acc = 0.0;
    double bound = 0.0;
    std::size_t used = 0;
    while (!stack.empty()) {
        const QuadSegment seg = stack.back();
        stack.pop_back();
        ++used;

        const double m = 0.5 * (seg.a + seg.b);
        const double lm = 0.5 * (seg.a + m);
        const double rm = 0.5 * (m + seg.b);
        const double flm = f(lm);
        const double frm = f(rm);
        const double half = 0.5 * (seg.b - seg.a);
        const double s_left = half / 6.0 * (seg.fa + 4.0 * flm + seg.fm);
        const double s_right = half / 6.0 * (seg.fm + 4.0 * frm + seg.fb);
        const double s2 = s_left + s_right;
        const double err = std::abs(s2 - seg.simpson) / 15.0;
        const double local_tol = tol * (seg.b - seg.a) / width;

        const bool out_of_budget = used + stack.size() >= budget;
        const bool too_narrow = (seg.b - seg.a) < 1e-14 * width;
        if (err <= local_tol || out_of_budget || too_narrow) {
            acc += s2 + (s2 - seg.simpson) / 15.0;
            bound += err;
        } else {
            stack.push_back(QuadSegment{seg.a, m, seg.fa, flm, seg.fm, s_left});
            stack.push_back(QuadSegment{m, seg.b, seg.fm, frm, seg.fb, s_right});
        }
    }
    if (bound > tol) {
        throw numeric_error("adaptive_simpson: interval budget exhausted, achieved bound " +
                                std::to_string(bound) + " > tolerance " + std::to_string(tol),
                            acc, bound);
    }
    return acc;
}

inline double gaussian_mass(double lo, double hi, double mean, double sd) {
    const double rt2 = std::sqrt(2.0);
    return 0.5 * (std::erf((hi - mean) / (sd * rt2)) - std::erf((lo - mean) / (sd * rt2)));
}

/// Exact integral of a piecewise-linear tabulated density over [lo, hi].
inline double tabulated_mass(const Spectrum& s, double lo, double hi) {
    const auto& t = s.table();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.omega.size(); ++i) {
        const double a = std::max(t.omega[i], lo);
        const double b = std::min(t.omega[i + 1], hi);
        if (b <= a) continue;
        acc += 0.5 * (s.density(a) + s.density(b)) * (b - a);
    }
    return acc;
}

} // namespace detail

/// Spectral average  integral f(omega) g(omega) d omega  evaluated by
/// adaptive quadrature over the window mean +- 6 intensity standard
/// deviations (clipped to a tabulated grid's support) and normalized by the
/// spectral mass inside that window, so that g == 1 integrates to 1 exactly.
/// Absolute error <= tol, estimated by interval-halving agreement.
template <class F>
double quadrature(F&& integrand, const Spectrum& s, double tol) {
    if (!(tol > 0.0)) {
        throw domain_error("quadrature: tolerance must be positive");
    }
    const double mean = s.mean();
    const double sd = s.intensity_sd();
    double lo = mean - 6.0 * sd;
    double hi = mean + 6.0 * sd;
    double mass = 0.0;
    if (s.is_gaussian()) {
        mass = detail::gaussian_mass(lo, hi, mean, sd);
    } else {
        const auto& t = s.table();
        lo = std::max(lo, t.omega.front());
        hi = std::min(hi, t.omega.back());
        mass = detail::tabulated_mass(s, lo, hi);
    }
    if (!(hi > lo) || !(mass > 0.0)) {
        throw contract_error("quadrature: degenerate integration window");
    }
    auto weighted = [&](double w) { return s.density(w) * integrand(w); };
    const double raw = detail::adaptive_simpson(weighted, lo, hi, tol * mass * 0.5);
    return raw / mass;
}

} // namespace cohrec
