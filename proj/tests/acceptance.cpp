#include <iostream>

#include "mg/verify.hpp"

// One PASS/FAIL line per acceptance criterion; tolerances live in verify.cpp.
int main(int argc, char** argv) {
    mg::VerifyOptions opts;
    opts.root = MG_SOURCE_DIR;
    for (int i = 1; i < argc; ++i) opts.only.push_back(argv[i]);
    auto results = mg::run_verify(opts, std::cout);
    return mg::all_passed(results) ? 0 : 1;
}
