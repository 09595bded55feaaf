#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cohrec/constants.hpp"
#include "cohrec/errors.hpp"
#include "cohrec/rng.hpp"

namespace cohrec {

/// Photon frequency distribution: the environment's memory kernel.
///
/// Width convention (important, easy to get wrong): a Gaussian spectrum is
/// parameterized by the carrier omega0 and a spread sigma, both in rad/s,
/// DEFINED so that the decoherence factor is exactly
///
///     D(gamma) = exp(i gamma omega0 - gamma^2 sigma^2 / 16).
///
/// That pins the spectral intensity density f(omega) to a normal law with
/// standard deviation sigma / (2 sqrt 2). Experimental spreads quoted in
/// ordinary Hz enter through gaussian_from_experiment, which multiplies by
/// 2 pi; using the quoted number directly as rad/s predicts a coherence
/// envelope of ~0.90 instead of ~0.013 at 74 wavelengths of retardation,
/// which is how a convention slip shows up downstream.
class Spectrum {
public:
    struct Gaussian {
        double omega0; // rad/s
        double sigma;  // rad/s, envelope convention above
    };

    struct Tabulated {
        std::vector<double> omega;      // rad/s, strictly increasing
        std::vector<double> density;    // 1/(rad/s), non-negative
        std::vector<double> cumulative; // trapezoid CDF at the knots
        double mass;                    // trapezoid integral of density
        double mean;
        double sd; // intensity standard deviation
    };

    static Spectrum gaussian(double omega0, double sigma) {
        if (!(omega0 > 0.0) || !(sigma > 0.0)) {
            throw domain_error("Spectrum::gaussian: omega0 and sigma must be positive");
        }
        return Spectrum(Gaussian{omega0, sigma});
    }

    static Spectrum tabulated(std::vector<double> omega, std::vector<double> density) {
        if (omega.size() < 2 || omega.size() != density.size()) {
            throw domain_error("Spectrum::tabulated: need matching grids of >= 2 points");
        }
        Tabulated t;
        t.omega = std::move(omega);
        t.density = std::move(density);
        t.cumulative.resize(t.omega.size(), 0.0);
        double mean_acc = 0.0;
        double m2_acc = 0.0;
        for (std::size_t i = 0; i + 1 < t.omega.size(); ++i) {
            const double dw = t.omega[i + 1] - t.omega[i];
            if (!(dw > 0.0)) {
                throw domain_error("Spectrum::tabulated: omega grid must be strictly increasing");
            }
            if (t.density[i] < 0.0 || t.density[i + 1] < 0.0) {
                throw domain_error("Spectrum::tabulated: densities must be non-negative");
            }
            const double seg = 0.5 * (t.density[i] + t.density[i + 1]) * dw;
            t.cumulative[i + 1] = t.cumulative[i] + seg;
            // trapezoid moments of the same piecewise-linear density
            mean_acc += 0.5 * (t.density[i] * t.omega[i] + t.density[i + 1] * t.omega[i + 1]) * dw;
            m2_acc += 0.5 * (t.density[i] * t.omega[i] * t.omega[i] +
                             t.density[i + 1] * t.omega[i + 1] * t.omega[i + 1]) * dw;
        }
        t.mass = t.cumulative.back();
        if (std::abs(t.mass - 1.0) > 1e-9) {
            throw domain_error("Spectrum::tabulated: trapezoid integral differs from 1 beyond 1e-9");
        }
        t.mean = mean_acc / t.mass;
        const double var = m2_acc / t.mass - t.mean * t.mean;
        t.sd = std::sqrt(var > 0.0 ? var : 0.0);
        return Spectrum(std::move(t));
    }

    /// Loads a two-column CSV (omega_rad_per_s, density); header row required.
    static Spectrum tabulated_from_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw domain_error("Spectrum: cannot open '" + path + "'");
        }
        std::string line;
        if (!std::getline(in, line)) {
            throw domain_error("Spectrum: '" + path + "' is empty, header row required");
        }
        double a = 0.0;
        double b = 0.0;
        if (parse_row(line, a, b)) {
            throw domain_error("Spectrum: '" + path + "' starts with data, header row required");
        }
        std::vector<double> omega;
        std::vector<double> density;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
                continue;
            }
            if (!parse_row(line, a, b)) {
                throw domain_error("Spectrum: bad row at " + path + ":" + std::to_string(lineno));
            }
            omega.push_back(a);
            density.push_back(b);
        }
        return tabulated(std::move(omega), std::move(density));
    }

    bool is_gaussian() const noexcept { return std::holds_alternative<Gaussian>(variant_); }

    double omega0() const {
        return gaussian_or_throw("omega0").omega0;
    }

    double sigma() const {
        return gaussian_or_throw("sigma").sigma;
    }

    /// Mean of the intensity density.
    double mean() const noexcept {
        if (const auto* g = std::get_if<Gaussian>(&variant_)) {
            return g->omega0;
        }
        return std::get<Tabulated>(variant_).mean;
    }

    /// Standard deviation of the intensity density (sigma / (2 sqrt 2) for
    /// the Gaussian variant).
    double intensity_sd() const noexcept {
        if (const auto* g = std::get_if<Gaussian>(&variant_)) {
            return g->sigma / (2.0 * std::sqrt(2.0));
        }
        return std::get<Tabulated>(variant_).sd;
    }

    /// Density value at omega (normal law or linear interpolation; zero
    /// outside a tabulated grid).
    double density(double omega) const noexcept {
        if (const auto* g = std::get_if<Gaussian>(&variant_)) {
            const double sd = g->sigma / (2.0 * std::sqrt(2.0));
            const double z = (omega - g->omega0) / sd;
            return std::exp(-0.5 * z * z) / (sd * std::sqrt(two_pi));
        }
        const auto& t = std::get<Tabulated>(variant_);
        if (omega <= t.omega.front() || omega >= t.omega.back()) {
            return omega == t.omega.front()   ? t.density.front()
                   : omega == t.omega.back() ? t.density.back()
                                             : 0.0;
        }
        const auto it = std::upper_bound(t.omega.begin(), t.omega.end(), omega);
        const std::size_t i = static_cast<std::size_t>(it - t.omega.begin()) - 1;
        const double w = (omega - t.omega[i]) / (t.omega[i + 1] - t.omega[i]);
        return t.density[i] + w * (t.density[i + 1] - t.density[i]);
    }

    const Tabulated& table() const {
        if (const auto* t = std::get_if<Tabulated>(&variant_)) {
            return *t;
        }
        throw unsupported_error("Spectrum: table() on a Gaussian spectrum");
    }

private:
    explicit Spectrum(Gaussian g) : variant_(g) {}
    explicit Spectrum(Tabulated t) : variant_(std::move(t)) {}

    const Gaussian& gaussian_or_throw(const char* what) const {
        if (const auto* g = std::get_if<Gaussian>(&variant_)) {
            return *g;
        }
        throw unsupported_error(std::string("Spectrum: ") + what + " on a tabulated spectrum");
    }

    static bool parse_row(const std::string& line, double& a, double& b) {
        std::istringstream ss(line);
        std::string cell;
        if (!std::getline(ss, cell, ',')) return false;
        char* end = nullptr;
        a = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0') return false;
        if (!std::getline(ss, cell)) return false;
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        b = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0') return false;
        return true;
    }

    std::variant<Gaussian, Tabulated> variant_;
};

/// Gaussian spectrum from the experimental handles: center wavelength in
/// meters and frequency spread in ordinary Hz (converted by 2 pi).
inline Spectrum gaussian_from_experiment(double lambda0_m, double sigma_ordinary_hz) {
    if (!(lambda0_m > 0.0) || !(sigma_ordinary_hz > 0.0)) {
        throw domain_error("gaussian_from_experiment: inputs must be positive");
    }
    return Spectrum::gaussian(two_pi * c_light / lambda0_m, two_pi * sigma_ordinary_hz);
}

/// D(gamma) = integral of f(omega) e^{i gamma omega} d omega together with
/// the delay it was evaluated at. |value| <= 1; D(0) = 1 exactly.
struct DecoherenceFactor {
    complexd value;
    double gamma; // seconds
};

inline DecoherenceFactor decoherence_factor(const Spectrum& s, double gamma) {
    if (gamma == 0.0) {
        return DecoherenceFactor{complexd{1.0, 0.0}, 0.0};
    }
    if (s.is_gaussian()) {
        const double envelope = std::exp(-gamma * gamma * s.sigma() * s.sigma() / 16.0);
        return DecoherenceFactor{std::polar(envelope, gamma * s.omega0()), gamma};
    }
    const auto& t = s.table();
    if (std::abs(t.mass - 1.0) > 1e-9) {
        throw contract_error("decoherence_factor: tabulated spectrum lost normalization");
    }
    // Trapezoid on the given grid; the grid must resolve the e^{i gamma omega}
    // oscillation with at least 20 points per period.
    double max_dw = 0.0;
    for (std::size_t i = 0; i + 1 < t.omega.size(); ++i) {
        max_dw = std::max(max_dw, t.omega[i + 1] - t.omega[i]);
    }
    const double phase_per_step = std::abs(gamma) * max_dw;
    if (phase_per_step > two_pi / 20.0) {
        throw numeric_error(
            "decoherence_factor: grid spacing " + std::to_string(max_dw) +
                " rad/s under-resolves the oscillation at gamma = " + std::to_string(gamma),
            0.0, phase_per_step);
    }
    complexd acc{0.0, 0.0};
    for (std::size_t i = 0; i + 1 < t.omega.size(); ++i) {
        const complexd lo = t.density[i] * std::polar(1.0, gamma * t.omega[i]);
        const complexd hi = t.density[i + 1] * std::polar(1.0, gamma * t.omega[i + 1]);
        acc += 0.5 * (lo + hi) * (t.omega[i + 1] - t.omega[i]);
    }
    return DecoherenceFactor{acc, gamma};
}

/// One frequency draw from the intensity density. Gaussian spectra return a
/// normal deviate with sd sigma/(2 sqrt 2); tabulated spectra invert the
/// trapezoid CDF (density linear within each segment).
inline double sample_frequency(const Spectrum& s, rng::SplitMix64& gen) {
    if (s.is_gaussian()) {
        return s.mean() + s.intensity_sd() * gen.next_normal();
    }
    const auto& t = s.table();
    const double target = gen.next_double() * t.mass;
    const auto it = std::upper_bound(t.cumulative.begin(), t.cumulative.end(), target);
    std::size_t i = it == t.cumulative.end()
                        ? t.cumulative.size() - 2
                        : static_cast<std::size_t>(it - t.cumulative.begin());
    i = i > 0 ? i - 1 : 0;
    const double rest = target - t.cumulative[i];
    const double dw = t.omega[i + 1] - t.omega[i];
    const double f0 = t.density[i];
    const double slope = (t.density[i + 1] - f0) / dw;
    if (std::abs(slope) < 1e-300) {
        return f0 > 0.0 ? t.omega[i] + rest / f0 : t.omega[i];
    }
    // solve f0*d + slope*d^2/2 = rest for d in [0, dw]
    const double disc = f0 * f0 + 2.0 * slope * rest;
    const double d = (-f0 + std::sqrt(disc > 0.0 ? disc : 0.0)) / slope;
    return t.omega[i] + std::clamp(d, 0.0, dw);
}

} // namespace cohrec
