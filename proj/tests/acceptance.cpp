// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ids...]

#include <cstdlib>
#include <iostream>
#include <string>

#include "causal/acceptance.hpp"

int main(int argc, char** argv) {
    causal::acceptance::Options opts;
    for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
    const bool ok = causal::acceptance::report(opts, std::cout);
    std::cout << (ok ? "acceptance: all criteria passed" : "acceptance: some criteria FAILED") << '\n';
    return ok ? 0 : 1;
}
