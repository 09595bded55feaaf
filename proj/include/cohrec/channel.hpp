#pragma once

#include <cmath>
#include <complex>

#include "cohrec/constants.hpp"
#include "cohrec/errors.hpp"
#include "cohrec/polarization.hpp"
#include "cohrec/spectrum.hpp"

namespace cohrec {

/// Birefringent segment reduced to its group delay gamma = L * delta_n / c
/// [seconds]. Physical constructors produce gamma >= 0; a signed gamma is
/// allowed for analytic use. Channels on the same axis compose by adding
/// delays.
struct Channel {
    double gamma = 0.0; // seconds

    friend Channel operator+(Channel a, Channel b) noexcept {
        return Channel{a.gamma + b.gamma};
    }
};

/// Channel from a retardation x expressed in units of lambda0.
inline Channel gamma_from_retardation(double x_lambda0, double lambda0_m) {
    if (!(lambda0_m > 0.0)) {
        throw domain_error("gamma_from_retardation: lambda0 must be positive");
    }
    return Channel{x_lambda0 * lambda0_m / c_light};
}

/// Channel from crystal thickness and index difference delta_n = n_o - n_e.
inline Channel gamma_from_thickness(double thickness_m, double delta_n) {
    if (!(thickness_m >= 0.0) || !(delta_n > 0.0)) {
        throw domain_error("gamma_from_thickness: need thickness >= 0 and delta_n > 0");
    }
    return Channel{thickness_m * delta_n / c_light};
}

/// Evolution conditioned on a single frequency: the V amplitude picks up
/// the phase e^{i gamma omega}, H is the environment eigenstate.
inline PureState evolve_conditional(const PureState& psi, Channel ch, double omega) noexcept {
    return PureState{psi.amp_h, psi.amp_v * std::polar(1.0, ch.gamma * omega)};
}

/// Reduced density operator after tracing the frequency degree of freedom:
/// populations unchanged, HV coherence damped by conj(D(gamma)).
inline DensityMatrix reduced_state(const PureState& psi, const Spectrum& s, Channel ch) {
    const complexd d = decoherence_factor(s, ch.gamma).value;
    DensityMatrix rho = density_of(psi);
    rho.hv *= std::conj(d);
    rho.vh *= d;
    return rho;
}

/// Probability of detecting psi again after the channel, Gaussian closed
/// form included: |a|^4 + |b|^4 + 2|a|^2|b|^2 Re D(gamma).
inline double survival_probability(const PureState& psi, const Spectrum& s, Channel ch) {
    const double a2 = psi.mag_h_sq();
    const double b2 = psi.mag_v_sq();
    const double re_d = decoherence_factor(s, ch.gamma).value.real();
    return a2 * a2 + b2 * b2 + 2.0 * a2 * b2 * re_d;
}

} // namespace cohrec
