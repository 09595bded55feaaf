#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "cohrec/channel.hpp"
#include "cohrec/errors.hpp"
#include "cohrec/measurement.hpp"
#include "cohrec/rng.hpp"
#include "cohrec/spectrum.hpp"

namespace cohrec {

/// Counting-statistics shot configuration. The photon number is Poisson
/// with mean pair_rate * integration_time unless fixed_total pins it.
/// When with_measurement is false the two delays act as one channel of
/// gamma1 + gamma2 (delays on the same axis add).
struct CountingConfig {
    MeasurementScenario scenario;
    double pair_rate = 28000.0;       // coincidences per second
    double integration_time = 10.0;   // seconds
    std::uint64_t seed = 0;
    bool with_measurement = true;
    std::optional<std::uint64_t> fixed_total{};
};

struct CountRecord {
    std::uint64_t n_total = 0;
    std::uint64_t n_detected = 0;
    double p_hat = 0.0;
    double std_err = 0.0;
};

/// Total photon number for a run: the StreamTag::total_count stream of the
/// run seed, independent of every photon stream.
inline std::uint64_t draw_total(const CountingConfig& cfg) {
    if (cfg.fixed_total) {
        return *cfg.fixed_total;
    }
    if (!(cfg.pair_rate > 0.0) || !(cfg.integration_time > 0.0)) {
        throw domain_error("CountingConfig: pair_rate and integration_time must be positive");
    }
    auto gen = rng::SplitMix64::stream(cfg.seed, rng::StreamTag::total_count, 0);
    return rng::sample_poisson(gen, cfg.pair_rate * cfg.integration_time);
}

/// Fate of photon `index`, fully determined by (seed, index): draw omega
/// from the spectrum, pick a branch with probability K+-(omega) when
/// measuring, then detect against the analyzer. Photons may therefore be
/// sharded across workers in any split without changing the totals.
inline bool photon_detected(const CountingConfig& cfg, std::uint64_t index) {
    auto gen = rng::SplitMix64::stream(cfg.seed, rng::StreamTag::photon, index);
    const double omega = sample_frequency(cfg.scenario.spectrum, gen);
    double p = 0.0;
    if (cfg.with_measurement) {
        const BranchWeights k = branch_weights(cfg.scenario.initial, cfg.scenario.gamma1, omega);
        const bool took_plus = gen.next_double() < k.k_plus;
        const auto [path1, path2] = branch_states(omega, cfg.scenario.gamma2);
        p = std::norm(overlap(cfg.scenario.analyzer, took_plus ? path1 : path2));
    } else {
        const Channel total{cfg.scenario.gamma1 + cfg.scenario.gamma2};
        p = std::norm(overlap(cfg.scenario.analyzer,
                              evolve_conditional(cfg.scenario.initial, total, omega)));
    }
    return gen.next_double() < p;
}

/// Photon-by-photon experiment simulation with shot noise only.
inline CountRecord simulate_counts(const CountingConfig& cfg) {
    CountRecord rec;
    rec.n_total = draw_total(cfg);
    for (std::uint64_t i = 0; i < rec.n_total; ++i) {
        rec.n_detected += photon_detected(cfg, i) ? 1 : 0;
    }
    if (rec.n_total > 0) {
        rec.p_hat = static_cast<double>(rec.n_detected) / static_cast<double>(rec.n_total);
        rec.std_err = std::sqrt(rec.p_hat * (1.0 - rec.p_hat) / static_cast<double>(rec.n_total));
    }
    return rec;
}

} // namespace cohrec
