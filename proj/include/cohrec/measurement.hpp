#pragma once

#include <cmath>
#include <complex>
#include <utility>

#include "cohrec/channel.hpp"
#include "cohrec/errors.hpp"
#include "cohrec/polarization.hpp"
#include "cohrec/quadrature.hpp"
#include "cohrec/spectrum.hpp"

namespace cohrec {

/// Full description of one run: prepare `initial`, dephase for gamma1,
/// project onto the +/- basis (paths recombined incoherently), dephase the
/// branch states for gamma2, detect along `analyzer`.
struct MeasurementScenario {
    PureState initial;
    Spectrum spectrum;
    double gamma1; // seconds, pre-measurement delay
    double gamma2; // seconds, post-measurement delay
    PureState analyzer;

    MeasurementScenario(PureState initial_, Spectrum spectrum_, double gamma1_,
                        double gamma2_, PureState analyzer_)
        : initial(initial_),
          spectrum(std::move(spectrum_)),
          gamma1(gamma1_),
          gamma2(gamma2_),
          analyzer(analyzer_) {
        if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) {
            throw domain_error("MeasurementScenario: delays must be non-negative");
        }
    }

    /// Common case: the detector is set to the prepared state.
    static MeasurementScenario detect_initial(PureState initial, Spectrum spectrum,
                                              double gamma1, double gamma2) {
        return MeasurementScenario(initial, std::move(spectrum), gamma1, gamma2, initial);
    }

    bool analyzer_is_initial(double tol = 1e-9) const {
        return std::norm(overlap(analyzer, initial)) >= 1.0 - tol;
    }
};

/// Probabilities of projecting onto + and - at a single frequency:
/// K+ = (1 + 2|a||b| cos(phi + gamma1 omega)) / 2, K- its complement.
struct BranchWeights {
    double k_plus;
    double k_minus;
};

inline BranchWeights branch_weights(const PureState& initial, double gamma1,
                                    double omega) noexcept {
    const double mag_ab = std::sqrt(initial.mag_h_sq() * initial.mag_v_sq());
    const double phi = initial.relative_phase();
    const double k_plus = 0.5 * (1.0 + 2.0 * mag_ab * std::cos(phi + gamma1 * omega));
    return BranchWeights{k_plus, 1.0 - k_plus};
}

/// Residual branch states after the post-measurement delay, with the
/// sigma_x relabel folded in: path 1 is (|V> + e^{i gamma2 omega}|H>)/sqrt2,
/// path 2 the orthogonal partner with the minus sign.
inline std::pair<PureState, PureState> branch_states(double omega, double gamma2) noexcept {
    const complexd phase = std::polar(1.0 / std::sqrt(2.0), gamma2 * omega);
    const complexd v{1.0 / std::sqrt(2.0), 0.0};
    return {PureState{phase, v}, PureState{-phase, v}};
}

namespace detail {

inline void require_detects_initial(const MeasurementScenario& sc, const char* who) {
    if (!sc.analyzer_is_initial()) {
        throw domain_error(std::string(who) +
                           ": analyzer must match the prepared state; use "
                           "branch_detection_probability for arbitrary analyzers");
    }
}

} // namespace detail

/// Probability of re-detecting the prepared state with the mid-evolution
/// measurement, by adaptive quadrature of
///   1/2 + 2|a|^2|b|^2 integral f(omega) cos(phi+gamma1 omega) cos(phi+gamma2 omega).
inline double recovered_probability_quadrature(const MeasurementScenario& sc, double tol) {
    detail::require_detects_initial(sc, "recovered_probability_quadrature");
    const double a2 = sc.initial.mag_h_sq();
    const double b2 = sc.initial.mag_v_sq();
    const double phi = sc.initial.relative_phase();
    const double integral = quadrature(
        [&](double w) {
            return std::cos(phi + sc.gamma1 * w) * std::cos(phi + sc.gamma2 * w);
        },
        sc.spectrum, tol);
    return 0.5 + 2.0 * a2 * b2 * integral;
}

/// Gaussian closed form of the same probability:
///   1/2 + |a|^2|b|^2 [ cos(2 phi + G omega0) e^{-G^2 sigma^2/16}
///                    + cos(X omega0)         e^{-X^2 sigma^2/16} ]
/// with G = gamma1 + gamma2 and X = gamma1 - gamma2 (even in X).
inline double recovered_probability_closed(const MeasurementScenario& sc) {
    if (!sc.spectrum.is_gaussian()) {
        throw unsupported_error(
            "recovered_probability_closed: closed form needs a Gaussian spectrum; "
            "use recovered_probability_quadrature");
    }
    detail::require_detects_initial(sc, "recovered_probability_closed");
    const double a2 = sc.initial.mag_h_sq();
    const double b2 = sc.initial.mag_v_sq();
    const double phi = sc.initial.relative_phase();
    const complexd d_sum = decoherence_factor(sc.spectrum, sc.gamma1 + sc.gamma2).value;
    const complexd d_diff = decoherence_factor(sc.spectrum, sc.gamma1 - sc.gamma2).value;
    const double echo_terms =
        (std::polar(1.0, 2.0 * phi) * d_sum).real() + d_diff.real();
    return 0.5 + a2 * b2 * echo_terms;
}

/// Detection probability for an arbitrary analyzer, evaluated through the
/// branch machinery: K+(omega) |<a|phi1>|^2 + K-(omega) |<a|phi2>|^2
/// averaged over the spectrum. Independent route from the closed form.
inline double branch_detection_probability(const MeasurementScenario& sc, double tol) {
    return quadrature(
        [&](double w) {
            const BranchWeights k = branch_weights(sc.initial, sc.gamma1, w);
            const auto [path1, path2] = branch_states(w, sc.gamma2);
            return k.k_plus * std::norm(overlap(sc.analyzer, path1)) +
                   k.k_minus * std::norm(overlap(sc.analyzer, path2));
        },
        sc.spectrum, tol);
}

/// Long-delay limit of the recovered probability at the echo condition:
/// 1/2 + b(1-b) for b = |amp_v|^2.
inline double asymptotic_with_measurement(double b) noexcept {
    return 0.5 + b * (1.0 - b);
}

/// Long-delay limit without measurement: (1-b)^2 + b^2.
inline double asymptotic_without_measurement(double b) noexcept {
    return (1.0 - b) * (1.0 - b) + b * b;
}

/// Open interval of b = |amp_v|^2 where the measured evolution beats the
/// unmeasured one asymptotically: ((3 - sqrt 3)/6, (3 + sqrt 3)/6).
inline std::pair<double, double> recovery_window() noexcept {
    const double rt3 = std::sqrt(3.0);
    return {(3.0 - rt3) / 6.0, (3.0 + rt3) / 6.0};
}

/// Best re-detection fidelity classical optics allows for the maximally
/// recovered family: 2/3.
inline double classical_limit() noexcept { return 2.0 / 3.0; }

} // namespace cohrec
