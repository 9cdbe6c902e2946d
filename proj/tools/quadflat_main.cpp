#include <iostream>

#include "quadflat/cli.hpp"

int main(int argc, char** argv) { return quadflat::run_cli(argc, argv, std::cout, std::cerr); }
