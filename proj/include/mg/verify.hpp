#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mg {

struct VerifyOptions {
    std::string root = ".";          // repository root holding scenarios/
    std::vector<std::string> only;   // group names (markov, cost, hopf, coloring) or criterion numbers
};

struct CriterionResult {
    std::string id;     // e.g. "3b-ms"
    int criterion = 0;  // 1..9
    std::string group;
    std::string name;
    bool passed = false;
    std::string observed;
    std::string expected;
};

const char* criterion_group(int criterion);

// Runs the acceptance suite, one PASS/FAIL line per item on out.
std::vector<CriterionResult> run_verify(const VerifyOptions& opts, std::ostream& out);
bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace mg
