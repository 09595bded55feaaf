#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "cohrec/montecarlo.hpp"
#include "test_support.hpp"

using namespace cohrec;
using Catch::Approx;

namespace {

CountingConfig plus_config(double x1, double x2, std::uint64_t seed, bool with_measurement) {
    auto sc = MeasurementScenario::detect_initial(make_pure(0.5, 0.0), testsup::paper_spectrum(),
                                                  testsup::paper_gamma(x1),
                                                  testsup::paper_gamma(x2));
    CountingConfig cfg{sc};
    cfg.seed = seed;
    cfg.with_measurement = with_measurement;
    return cfg;
}

} // namespace

TEST_CASE("identical seeds reproduce identical records", "[montecarlo]") {
    const CountingConfig cfg = plus_config(37.0, 37.0, 99, true);
    const CountRecord a = simulate_counts(cfg);
    const CountRecord b = simulate_counts(cfg);
    CHECK(a.n_total == b.n_total);
    CHECK(a.n_detected == b.n_detected);
    CHECK(a.p_hat == b.p_hat);

    CountingConfig other = cfg;
    other.seed = 100;
    const CountRecord c = simulate_counts(other);
    CHECK(c.n_detected != a.n_detected);
}

TEST_CASE("photon fates depend only on seed and index", "[montecarlo]") {
    CountingConfig cfg = plus_config(37.0, 37.0, 7, true);
    cfg.fixed_total = 20000;
    const CountRecord rec = simulate_counts(cfg);

    std::uint64_t first = 0;
    for (std::uint64_t i = 0; i < 9000; ++i) {
        first += photon_detected(cfg, i) ? 1 : 0;
    }
    std::uint64_t second = 0;
    for (std::uint64_t i = 9000; i < 20000; ++i) {
        second += photon_detected(cfg, i) ? 1 : 0;
    }
    CHECK(first + second == rec.n_detected);
}

TEST_CASE("zero delay detects every photon", "[montecarlo]") {
    CountingConfig cfg = plus_config(0.0, 0.0, 3, true);
    cfg.fixed_total = 50000;
    const CountRecord rec = simulate_counts(cfg);
    CHECK(rec.n_detected == rec.n_total);
    CHECK(rec.p_hat == 1.0);

    CountingConfig plain = plus_config(0.0, 0.0, 3, false);
    plain.fixed_total = 50000;
    CHECK(simulate_counts(plain).p_hat == 1.0);
}

TEST_CASE("counts agree with the closed forms at the working points", "[montecarlo]") {
    // no measurement, 74 wavelengths: Gaussian closed form 0.50642...
    const CountRecord no_meas = simulate_counts(plus_config(37.0, 37.0, 42, false));
    CHECK(std::abs(no_meas.p_hat - 0.506423730419889) < 3.0 * no_meas.std_err);

    // measured evolution, symmetric split of the same total: 0.75321...
    const CountRecord meas = simulate_counts(plus_config(37.0, 37.0, 42, true));
    CHECK(std::abs(meas.p_hat - 0.753211865209944) < 3.0 * meas.std_err);

    // deep recovery: L1 = L2 = 74 wavelengths
    const CountRecord deep = simulate_counts(plus_config(74.0, 74.0, 42, true));
    CHECK(std::abs(deep.p_hat - 0.750000006810974) < 3.0 * deep.std_err);
}

TEST_CASE("fixed totals pin the photon number", "[montecarlo]") {
    CountingConfig cfg = plus_config(37.0, 37.0, 1, true);
    cfg.fixed_total = 1234;
    const CountRecord rec = simulate_counts(cfg);
    CHECK(rec.n_total == 1234);
    CHECK(rec.std_err == Approx(std::sqrt(rec.p_hat * (1.0 - rec.p_hat) / 1234.0)));
}

TEST_CASE("poisson totals have the configured mean", "[montecarlo]") {
    CountingConfig cfg = plus_config(37.0, 37.0, 0, true);
    const double mean = cfg.pair_rate * cfg.integration_time;
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        cfg.seed = seed;
        acc += static_cast<double>(draw_total(cfg));
    }
    CHECK(acc / 1000.0 == Approx(mean).epsilon(0.01));
}

TEST_CASE("seed-to-seed dispersion is binomial", "[montecarlo]") {
    const double p = 0.753211865209944; // closed form for the 37/37 split
    double chi_sq = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const CountRecord rec = simulate_counts(plus_config(37.0, 37.0, 1000 + seed, true));
        const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(rec.n_total));
        const double z = (rec.p_hat - p) / se;
        chi_sq += z * z;
    }
    // chi^2(100) quantiles at 1e-4 and 1 - 1e-4
    CHECK(chi_sq > 55.7245984505);
    CHECK(chi_sq < 161.3186569590);
}

TEST_CASE("counting config is validated", "[montecarlo]") {
    CountingConfig cfg = plus_config(37.0, 37.0, 1, true);
    cfg.pair_rate = 0.0;
    CHECK_THROWS_AS(simulate_counts(cfg), domain_error);
    cfg.pair_rate = 28000.0;
    cfg.integration_time = -1.0;
    CHECK_THROWS_AS(simulate_counts(cfg), domain_error);
    cfg.fixed_total = 100; // fixed totals bypass the rate entirely
    CHECK_NOTHROW(simulate_counts(cfg));
}
