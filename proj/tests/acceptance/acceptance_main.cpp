// Acceptance suite: one line per criterion, [PASS]/[FAIL], nonzero exit on
// any failure. The CLI binary path is argv[1] (used by the determinism
// criterion). Each criterion carries a wall-clock budget that is part of the
// pass condition.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cohrec/cohrec.hpp"

using namespace cohrec;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, double elapsed_ms, double budget_ms,
            const std::string& detail) {
    const bool in_budget = elapsed_ms < budget_ms;
    const bool pass = ok && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] %-28s %8.1f ms (budget %g ms)  %s%s\n", pass ? "PASS" : "FAIL",
                name.c_str(), elapsed_ms, budget_ms, detail.c_str(),
                in_budget ? "" : "  [over budget]");
    std::fflush(stdout);
}

template <class F>
void criterion(const std::string& name, double budget_ms, F&& body) {
    std::string detail;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
        ok = false;
    }
    const auto stop = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
    report(name, ok, ms, budget_ms, detail);
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

Spectrum paper_spectrum() { return PhysicsParams{}.spectrum(); }

double paper_gamma(double x) { return PhysicsParams{}.gamma_of_retardation(x); }

int run_cli(const std::string& bin, const std::string& args) {
    const std::string cmd = "\"" + bin + "\" " + args;
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    const std::string cli_bin = argc > 1 ? argv[1] : "";

    criterion("asymptotic-recovery", 1.0, [](std::string& detail) {
        const double with = asymptotic_with_measurement(0.5);
        const double without = asymptotic_without_measurement(0.5);
        detail = "with=" + fmt(with) + " without=" + fmt(without);
        return with == 0.75 && without == 0.5;
    });

    criterion("recovery-window", 1000.0, [](std::string& detail) {
        auto diff = [](double b) {
            return asymptotic_with_measurement(b) - asymptotic_without_measurement(b);
        };
        auto bisect = [&](double lo, double hi) {
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi);
                // keep the sign change inside [lo, hi]
                if ((diff(lo) < 0.0) == (diff(mid) < 0.0)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        };
        const double root_lo = bisect(0.05, 0.5);
        const double root_hi = bisect(0.5, 0.95);
        const auto window = recovery_window();
        const double err_lo = std::abs(root_lo - window.first);
        const double err_hi = std::abs(root_hi - window.second);
        detail = "roots " + fmt(root_lo) + ", " + fmt(root_hi) + " err " + fmt(err_lo) +
                 ", " + fmt(err_hi);
        return err_lo <= 1e-6 && err_hi <= 1e-6;
    });

    criterion("visibility-endpoint", 1000.0, [](std::string& detail) {
        const Spectrum s = paper_spectrum();
        const double re_d = decoherence_factor(s, paper_gamma(74.0)).value.real();
        const double v = re_d;
        const double v_meas = 0.5 + 0.5 * re_d;
        detail = "V=" + fmt(v) + " V'=" + fmt(v_meas);
        return std::abs(v - 0.0129) <= 0.0005 && std::abs(v_meas - 0.5064) <= 0.0005;
    });

    criterion("fidelity-trajectory", 1000.0, [](std::string& detail) {
        const double g74 = paper_gamma(74.0);
        const auto sc = MeasurementScenario::detect_initial(make_pure(0.5, 0.0),
                                                            paper_spectrum(), g74, g74);
        const double p = recovered_probability_closed(sc);
        detail = "P'(L1=L2=74) = " + fmt(p);
        return std::abs(p - 0.750) <= 0.001;
    });

    criterion("three-way-agreement", 120000.0, [](std::string& detail) {
        const Spectrum s = paper_spectrum();
        const double gammas[5] = {0.0, 0.625e-13, 1.25e-13, 1.875e-13, 2.5e-13};
        const double bs[3] = {0.1, 0.3, 0.5};
        const double phis[2] = {0.0, pi / 3.0};

        std::vector<MeasurementScenario> grid;
        for (int k = 0; k < 50; ++k) {
            grid.push_back(MeasurementScenario::detect_initial(
                make_pure(bs[k % 3], phis[k % 2]), s, gammas[k % 5], gammas[(k / 5) % 5]));
        }

        double worst_quad = 0.0;
        std::vector<double> closed(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            closed[k] = recovered_probability_closed(grid[k]);
            const double quad = recovered_probability_quadrature(grid[k], 1e-10);
            worst_quad = std::max(worst_quad, std::abs(closed[k] - quad));
        }
        if (worst_quad > 1e-9) {
            detail = "closed vs quadrature worst " + fmt(worst_quad);
            return false;
        }

        int worst_agree = 50;
        for (std::uint64_t seed_i = 0; seed_i < 20; ++seed_i) {
            int agree = 0;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                CountingConfig cfg{grid[k], 28000.0, 10.0, 1000 + seed_i * 101 + k, true};
                cfg.fixed_total = 280000;
                const CountRecord rec = simulate_counts(cfg);
                const double se = rec.std_err > 0.0 ? rec.std_err : 1e-12;
                if (std::abs(rec.p_hat - closed[k]) <= 3.0 * se) {
                    ++agree;
                }
            }
            worst_agree = std::min(worst_agree, agree);
            if (agree < 48) break;
        }
        detail = "quad worst " + fmt(worst_quad) + "; MC agreement min " +
                 std::to_string(worst_agree) + "/50 over 20 seeds";
        return worst_agree >= 48;
    });

    criterion("echo-property", 1000.0, [](std::string& detail) {
        const Spectrum s = paper_spectrum();
        const double total = 3.85e-13;
        double best = -1.0;
        int best_index = -1;
        for (int i = 0; i <= 1000; ++i) {
            const double g1 = total * i / 1000.0;
            const auto sc = MeasurementScenario::detect_initial(make_pure(0.5, 0.0), s, g1,
                                                                total - g1);
            const double p = recovered_probability_closed(sc);
            if (p > best) {
                best = p;
                best_index = i;
            }
        }
        detail = "argmax split index " + std::to_string(best_index) + " of 1000, P=" + fmt(best);
        return std::abs(best_index - 500) <= 1;
    });

    criterion("phi-invariance", 1000.0, [](std::string& detail) {
        const Spectrum s = paper_spectrum();
        double lo = 2.0;
        double hi = -2.0;
        for (int k = 0; k < 64; ++k) {
            const auto sc = MeasurementScenario::detect_initial(
                make_pure(0.5, two_pi * k / 64.0), s, 2.75e-13, 2.75e-13);
            const double p = recovered_probability_closed(sc);
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        detail = "spread " + fmt(hi - lo);
        return hi - lo < 1e-5;
    });

    criterion("structural-identities", 10000.0, [](std::string& detail) {
        const Spectrum s = paper_spectrum();
        auto gen = rng::SplitMix64::stream(77, rng::StreamTag::generic, 0);

        double worst_diag = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const PureState psi = make_pure(gen.next_double(), two_pi * gen.next_double());
            const Channel ch{gen.next_double() * 5e-13};
            const double direct = survival_probability(psi, s, ch);
            const double via_rho = detect_probability(psi, reduced_state(psi, s, ch));
            worst_diag = std::max(worst_diag, std::abs(direct - via_rho));
        }

        double worst_sum = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const PureState psi = make_pure(gen.next_double(), two_pi * gen.next_double());
            const BranchWeights k = branch_weights(psi, gen.next_double() * 5e-13,
                                                   2.2e15 + 4e14 * gen.next_double());
            worst_sum = std::max(worst_sum, std::abs(k.k_plus + k.k_minus - 1.0));
        }

        double worst_reduce = 0.0;
        const PureState plus = make_pure(0.5, 0.0);
        for (int x = 0; x <= 148; ++x) {
            const double g = paper_gamma(x);
            const auto sc = MeasurementScenario::detect_initial(plus, s, g, 0.0);
            worst_reduce = std::max(worst_reduce,
                                    std::abs(recovered_probability_closed(sc) -
                                             survival_probability(plus, s, Channel{g})));
        }

        detail = "diag " + fmt(worst_diag) + ", K-sum " + fmt(worst_sum) + ", reduce " +
                 fmt(worst_reduce);
        return worst_diag <= 1e-12 && worst_sum <= 1e-12 && worst_reduce <= 1e-9;
    });

    criterion("cli-determinism", 60000.0, [&](std::string& detail) {
        if (cli_bin.empty()) {
            detail = "cli binary path not supplied";
            return false;
        }
        const fs::path dir = fs::temp_directory_path() / "cohrec_acceptance";
        fs::create_directories(dir);
        const fs::path a = dir / "a.csv";
        const fs::path b = dir / "b.csv";
        const fs::path c = dir / "c.csv";

        const std::string common = "visibility-scan --mc --seed 7 --x-max 30 --time 0.5";
        if (run_cli(cli_bin, common + " --out " + a.string()) != 0) {
            detail = "first run failed";
            return false;
        }
        if (run_cli(cli_bin, common + " --out " + b.string()) != 0) {
            detail = "second run failed";
            return false;
        }
        const fs::path manifest = fs::path(a.string() + ".manifest.json");
        if (!fs::exists(manifest)) {
            detail = "manifest missing";
            return false;
        }
        if (run_cli(cli_bin, "visibility-scan --from-manifest " + manifest.string() +
                                 " --out " + c.string()) != 0) {
            detail = "manifest rerun failed";
            return false;
        }
        const std::string bytes_a = slurp(a);
        const bool same_repeat = bytes_a == slurp(b);
        const bool same_manifest = bytes_a == slurp(c);
        detail = std::string("repeat ") + (same_repeat ? "identical" : "DIFFERS") +
                 ", manifest rerun " + (same_manifest ? "identical" : "DIFFERS");
        return same_repeat && same_manifest && !bytes_a.empty();
    });

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                failures);
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
