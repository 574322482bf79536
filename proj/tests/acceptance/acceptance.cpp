// Runs every acceptance criterion once and prints one PASS/FAIL line each.
// A criterion fails when any of its checks fails or it exceeds its runtime
// budget. Usage: acceptance [seed]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "gaudin_lab/verify/suites.hpp"

int main(int argc, char **argv)
{
    using namespace gaudin_lab::verify;
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : default_seed;
    int failures = 0;
    double total = 0.0;
    for (const auto &entry : all_criteria()) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto report = run_criterion(entry.id, seed);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        total += secs;
        const bool in_budget = secs <= entry.budget_seconds;
        const bool pass = report.pass() && in_budget;
        failures += pass ? 0 : 1;
        std::printf("%s criterion %d: %s (%.2f s, budget %.0f s)\n", pass ? "PASS" : "FAIL", entry.id, report.title.c_str(), secs, entry.budget_seconds);
        for (const auto &c : report.checks) {
            const char *mark = c.pass ? "  ok " : "  BAD";
            if (c.kind == "order" || c.kind == "min_order") {
                std::printf("%s %-70s measured %-12.4g target %g tol %g\n", mark, c.name.c_str(), c.measured, c.target, c.tolerance);
            } else {
                std::printf("%s %-70s measured %-12.4g %s %g\n", mark, c.name.c_str(), c.measured, c.kind == "max" ? "<=" : ">=", c.tolerance);
            }
            if (!c.pass) {
                std::printf("      (%s)\n", c.anchor.c_str());
            }
        }
        if (!in_budget) {
            std::printf("  BAD runtime %.2f s exceeds budget %.0f s\n", secs, entry.budget_seconds);
        }
    }
    std::printf("%s %d/%zu criteria passed in %.2f s\n", failures == 0 ? "PASS" : "FAIL", static_cast<int>(all_criteria().size()) - failures, all_criteria().size(), total);
    return failures == 0 ? 0 : 1;
}
