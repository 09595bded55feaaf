#pragma once

#include <cmath>
#include <complex>

#include "cohrec/constants.hpp"
#include "cohrec/errors.hpp"

namespace cohrec {

/// Normalized pure polarization state over the (H, V) basis.
///
/// The convention throughout: states built from (|amp_v|^2, phi) carry a real
/// non-negative H amplitude, and the relative phase is arg(amp_v) - arg(amp_h).
/// States produced by evolution may hold arbitrary complex amplitude pairs.
struct PureState {
    complexd amp_h;
    complexd amp_v;

    /// Build from raw amplitudes; the pair is normalized. Throws
    /// domain_error if both amplitudes are (numerically) zero.
    static PureState from_amplitudes(complexd h, complexd v) {
        const double n2 = std::norm(h) + std::norm(v);
        if (!(n2 > 1e-300)) {
            throw domain_error("PureState: amplitudes have vanishing norm");
        }
        const double inv = 1.0 / std::sqrt(n2);
        return PureState{h * inv, v * inv};
    }

    double mag_h_sq() const noexcept { return std::norm(amp_h); }
    double mag_v_sq() const noexcept { return std::norm(amp_v); }

    /// Relative phase arg(amp_v) - arg(amp_h), the phi of the (b, phi)
    /// parameterization.
    double relative_phase() const noexcept {
        return std::arg(amp_v) - std::arg(amp_h);
    }
};

/// Inner product <a|b>.
inline complexd overlap(const PureState& a, const PureState& b) noexcept {
    return std::conj(a.amp_h) * b.amp_h + std::conj(a.amp_v) * b.amp_v;
}

/// The state orthogonal to psi (unique up to global phase).
inline PureState orthogonal_state(const PureState& psi) noexcept {
    return PureState{-std::conj(psi.amp_v), std::conj(psi.amp_h)};
}

/// State with |amp_v|^2 = mag_v_sq and relative phase phi, amp_h real >= 0.
inline PureState make_pure(double mag_v_sq, double phi) {
    if (!(mag_v_sq >= 0.0 && mag_v_sq <= 1.0)) {
        throw domain_error("make_pure: |amp_v|^2 must lie in [0, 1]");
    }
    const double mag_v = std::sqrt(mag_v_sq);
    const double mag_h = std::sqrt(1.0 - mag_v_sq);
    return PureState{complexd{mag_h, 0.0}, std::polar(mag_v, phi)};
}

/// 2x2 density operator in the (H, V) basis.
struct DensityMatrix {
    complexd hh;
    complexd hv;
    complexd vh;
    complexd vv;

    double trace_real() const noexcept { return hh.real() + vv.real(); }

    /// Smallest eigenvalue of the Hermitian part; used for the PSD check.
    double min_eigenvalue() const noexcept {
        const double t = trace_real();
        const double det = (hh * vv - hv * vh).real();
        const double half = 0.5 * t;
        const double disc = half * half - det;
        return half - std::sqrt(disc > 0.0 ? disc : 0.0);
    }

    double purity() const noexcept {
        return (hh * hh + hv * vh + vh * hv + vv * vv).real();
    }

    /// Checks hermiticity, unit trace and positive semidefiniteness at the
    /// given tolerance; throws contract_error on violation.
    void validate(double tol = 1e-12) const {
        if (std::abs(hh.imag()) > tol || std::abs(vv.imag()) > tol ||
            std::abs(hv - std::conj(vh)) > tol) {
            throw contract_error("DensityMatrix: not Hermitian");
        }
        if (std::abs(trace_real() - 1.0) > tol) {
            throw contract_error("DensityMatrix: trace differs from 1");
        }
        if (min_eigenvalue() < -tol) {
            throw contract_error("DensityMatrix: not positive semidefinite");
        }
    }
};

/// Rank-1 projector |psi><psi|.
inline DensityMatrix density_of(const PureState& psi) noexcept {
    return DensityMatrix{
        psi.amp_h * std::conj(psi.amp_h),
        psi.amp_h * std::conj(psi.amp_v),
        psi.amp_v * std::conj(psi.amp_h),
        psi.amp_v * std::conj(psi.amp_v),
    };
}

/// Detection probability <analyzer|rho|analyzer>. Validates rho first.
inline double detect_probability(const PureState& analyzer, const DensityMatrix& rho) {
    rho.validate();
    const complexd h = analyzer.amp_h;
    const complexd v = analyzer.amp_v;
    const complexd value = std::conj(h) * (rho.hh * h + rho.hv * v) +
                           std::conj(v) * (rho.vh * h + rho.vv * v);
    return value.real();
}

/// Interference visibility 2p - 1 of a detection probability p.
inline double visibility(double p) noexcept { return 2.0 * p - 1.0; }

/// Pauli sigma_x: swaps the H and V amplitudes.
inline PureState pauli_x(const PureState& psi) noexcept {
    return PureState{psi.amp_v, psi.amp_h};
}

} // namespace cohrec
