#include <iostream>

#include "mfgp/cli.hpp"

int main(int argc, char** argv) { return mfgp::cli::run(argc, argv, std::cout, std::cerr); }
