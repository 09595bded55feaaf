#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cohrec/channel.hpp"
#include "cohrec/errors.hpp"
#include "cohrec/measurement.hpp"
#include "cohrec/montecarlo.hpp"
#include "cohrec/polarization.hpp"
#include "cohrec/spectrum.hpp"

namespace cohrec {

/// Experimental constants of the optical setup; defaults are the published
/// ones (0.78 um center wavelength, 6.9e12 Hz ordinary-frequency spread,
/// quartz delta_n = 0.01).
struct PhysicsParams {
    double lambda0_m = 0.78e-6;
    double sigma_hz = 6.9e12;
    double delta_n = 0.01;

    Spectrum spectrum() const { return gaussian_from_experiment(lambda0_m, sigma_hz); }

    double gamma_of_retardation(double x) const {
        return gamma_from_retardation(x, lambda0_m).gamma;
    }
};

/// Monte Carlo column options for scans.
struct McParams {
    bool enabled = false;
    std::uint64_t seed = 0;
    double pair_rate = 28000.0;
    double integration_time = 10.0;
};

struct ScanRow {
    double x = 0.0;
    double p_no_meas = 0.0;
    double p_with_meas = 0.0;
    double v_no_meas = 0.0;
    double v_with_meas = 0.0;
    std::optional<double> mc_p_hat{};
    std::optional<double> mc_std_err{};
};

enum class ScanKind { landscape, visibility, fidelity_trajectory, tilt };

struct ScanSpec {
    ScanKind kind = ScanKind::visibility;
    std::vector<double> grid;
    PhysicsParams physics{};
    McParams mc{};
    double l1 = 74.0;      // trajectory / tilt: pre-measurement retardation
    double center = 148.0; // tilt
    double span = 1.0;     // tilt, in units of lambda0
    int n_points = 201;    // tilt
};

/// Delay long enough that every Gaussian coherence envelope in the default
/// physics is below 1e-15: the asymptotic regime.
inline constexpr double asymptotic_delay_s = 2.75e-13;

inline std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) {
        throw domain_error("linspace: need at least one point");
    }
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        g.push_back(lo);
        return g;
    }
    for (int i = 0; i < n; ++i) {
        g.push_back(lo + (hi - lo) * i / (n - 1));
    }
    return g;
}

namespace detail {

/// Per-row Monte Carlo seed: first output of the scan_row stream, so row
/// results depend only on (seed, output row index).
inline std::uint64_t row_seed(const McParams& mc, std::uint64_t row_index) {
    auto gen = rng::SplitMix64::stream(mc.seed, rng::StreamTag::scan_row, row_index);
    return gen.next();
}

inline void attach_mc(ScanRow& row, const McParams& mc, std::uint64_t row_index,
                      const MeasurementScenario& sc, bool with_measurement) {
    if (!mc.enabled) return;
    CountingConfig cfg{sc, mc.pair_rate, mc.integration_time, row_seed(mc, row_index),
                       with_measurement};
    const CountRecord rec = simulate_counts(cfg);
    row.mc_p_hat = rec.p_hat;
    row.mc_std_err = rec.std_err;
}

inline ScanRow make_row(double x, double p_no, double p_with) {
    return ScanRow{x, p_no, p_with, visibility(p_no), visibility(p_with), {}, {}};
}

} // namespace detail

/// Asymptotic fidelity landscape over b = |amp_v|^2 (the long-delay limits
/// with and without the mid-evolution measurement). Monte Carlo rows, when
/// enabled, simulate the measured evolution at the echo condition with
/// gamma1 = gamma2 = asymptotic_delay_s.
inline std::vector<ScanRow> landscape(const std::vector<double>& b_grid,
                                      const McParams& mc = {},
                                      const PhysicsParams& physics = {}) {
    std::vector<ScanRow> rows;
    rows.reserve(b_grid.size());
    for (std::size_t i = 0; i < b_grid.size(); ++i) {
        const double b = b_grid[i];
        if (!(b >= 0.0 && b <= 1.0)) {
            throw domain_error("landscape: b must lie in [0, 1]");
        }
        ScanRow row = detail::make_row(b, asymptotic_without_measurement(b),
                                       asymptotic_with_measurement(b));
        if (mc.enabled) {
            const auto sc = MeasurementScenario::detect_initial(
                make_pure(b, 0.0), physics.spectrum(), asymptotic_delay_s, asymptotic_delay_s);
            detail::attach_mc(row, mc, i, sc, true);
        }
        rows.push_back(row);
    }
    return rows;
}

/// Visibility against total retardation x, the measured evolution split
/// symmetrically (L1 = L2 = L/2). MC rows simulate the measured case.
inline std::vector<ScanRow> visibility_scan(const std::vector<double>& x_grid,
                                            const PhysicsParams& physics = {},
                                            const McParams& mc = {}) {
    const Spectrum spectrum = physics.spectrum();
    std::vector<ScanRow> rows;
    rows.reserve(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid[i];
        const double re_d = decoherence_factor(spectrum, physics.gamma_of_retardation(x)).value.real();
        const double p_no = 0.5 + 0.5 * re_d;          // survival of |+>
        const double p_with = 0.75 + 0.25 * re_d;      // echo condition, xi = 0
        ScanRow row = detail::make_row(x, p_no, p_with);
        if (mc.enabled) {
            const double half = physics.gamma_of_retardation(x) / 2.0;
            const auto sc = MeasurementScenario::detect_initial(make_pure(0.5, 0.0), spectrum,
                                                                half, half);
            detail::attach_mc(row, mc, i, sc, true);
        }
        rows.push_back(row);
    }
    return rows;
}

/// Fidelity of |+> along the insertion experiment: plain dephasing up to
/// retardation l1_max, then the measured evolution with L1 frozen and the
/// total retardation growing to x. Emits both the pre- and post-insertion
/// value at x = l1_max. The p_no_meas column keeps the unmeasured curve for
/// the whole range.
inline std::vector<ScanRow> fidelity_trajectory(double l1_max,
                                                const std::vector<double>& x_grid,
                                                const PhysicsParams& physics = {},
                                                const McParams& mc = {}) {
    if (!(l1_max >= 0.0)) {
        throw domain_error("fidelity_trajectory: l1_max must be non-negative");
    }
    const Spectrum spectrum = physics.spectrum();
    const PureState plus = make_pure(0.5, 0.0);
    const double gamma_l1 = physics.gamma_of_retardation(l1_max);

    std::vector<ScanRow> rows;
    rows.reserve(x_grid.size() + 1);
    std::uint64_t out_index = 0;
    for (const double x : x_grid) {
        const double gamma_total = physics.gamma_of_retardation(x);
        const double p_no = 0.5 + 0.5 * decoherence_factor(spectrum, gamma_total).value.real();
        const bool at_insertion = x == l1_max;
        if (x <= l1_max) {
            ScanRow row = detail::make_row(x, p_no, p_no);
            const auto sc = MeasurementScenario::detect_initial(plus, spectrum, gamma_total, 0.0);
            detail::attach_mc(row, mc, out_index++, sc, false);
            rows.push_back(row);
        }
        if (x >= l1_max) {
            const auto sc = MeasurementScenario::detect_initial(plus, spectrum, gamma_l1,
                                                                gamma_total - gamma_l1);
            ScanRow row = detail::make_row(x, p_no, recovered_probability_closed(sc));
            detail::attach_mc(row, mc, out_index++, sc, true);
            rows.push_back(row);
            (void)at_insertion;
        }
    }
    return rows;
}

/// Fine sub-wavelength sweep of the total retardation around `center` at
/// fixed L1, resolving the carrier oscillation of the recovered fidelity.
inline std::vector<ScanRow> tilt_oscillation(double center, double span, int n_points,
                                             double l1, const PhysicsParams& physics = {},
                                             const McParams& mc = {}) {
    if (!(span >= 0.0 && span <= 2.0)) {
        throw domain_error("tilt_oscillation: span must lie in [0, 2] wavelengths");
    }
    if (center - span / 2.0 < l1) {
        throw domain_error("tilt_oscillation: window reaches below L1");
    }
    const std::vector<double> grid =
        span == 0.0 ? std::vector<double>{center}
                    : linspace(center - span / 2.0, center + span / 2.0, n_points);
    const Spectrum spectrum = physics.spectrum();
    const PureState plus = make_pure(0.5, 0.0);
    const double gamma_l1 = physics.gamma_of_retardation(l1);

    std::vector<ScanRow> rows;
    rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        const double gamma_total = physics.gamma_of_retardation(x);
        const auto sc = MeasurementScenario::detect_initial(plus, spectrum, gamma_l1,
                                                            gamma_total - gamma_l1);
        const double p_no = 0.5 + 0.5 * decoherence_factor(spectrum, gamma_total).value.real();
        ScanRow row = detail::make_row(x, p_no, recovered_probability_closed(sc));
        detail::attach_mc(row, mc, i, sc, true);
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<ScanRow> run_scan(const ScanSpec& spec) {
    switch (spec.kind) {
        case ScanKind::landscape:
            return landscape(spec.grid, spec.mc, spec.physics);
        case ScanKind::visibility:
            return visibility_scan(spec.grid, spec.physics, spec.mc);
        case ScanKind::fidelity_trajectory:
            return fidelity_trajectory(spec.l1, spec.grid, spec.physics, spec.mc);
        case ScanKind::tilt:
            return tilt_oscillation(spec.center, spec.span, spec.n_points, spec.l1,
                                    spec.physics, spec.mc);
    }
    throw domain_error("run_scan: unknown scan kind");
}

} // namespace cohrec
