#include <iostream>

#include "causal/cli.hpp"

int main(int argc, char** argv) { return causal::cli::run(argc, argv, std::cout, std::cerr); }
