#pragma once

#include <string>
#include <vector>

namespace holoflow {

struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

/// The verification corpus behind `holoflow verify` and the acceptance test
/// binary: one entry per criterion, each run at its stated tolerance.
std::vector<CriterionResult> run_acceptance();

}  // namespace holoflow
