#include <iostream>

#include "lsqmamot/cli.hpp"

int main(int argc, char** argv) { return lsqmamot::cli::run(argc, argv, std::cout, std::cerr); }
