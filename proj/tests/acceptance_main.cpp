// Acceptance suite: one line per criterion, nonzero exit on any failure.
#include <cstdio>

#include "holoflow/acceptance.hpp"

int main() {
    auto results = holoflow::run_acceptance();
    int failed = 0;
    for (const auto& r : results) {
        std::printf("[%s] %2d  %-28s (%.1fs)  %s\n", r.pass ? "PASS" : "FAIL", r.index,
                    r.name.c_str(), r.seconds, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failed;
    }
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
