#pragma once

// The end-to-end acceptance criteria, shared by the acceptance test binary and
// `causalorder verify`.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace causal::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;  // 0: no runtime bound
};

struct Options {
    std::uint64_t seed = 20240601;
    std::vector<int> only;  // empty: all criteria
};

inline constexpr int kCriteria = 8;

CriterionResult run_criterion(int id, const Options& opts = {});
std::vector<CriterionResult> run_all(const Options& opts = {});

// "PASS  3 classical-free-particle  <detail>  (1.23 s)"
std::string format_line(const CriterionResult& r);

// Runs the selection, prints one line per criterion, returns true iff all passed.
bool report(const Options& opts, std::ostream& out);

}  // namespace causal::acceptance
