#include "spdgeom/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return spdgeom::cli::run(argc, argv, std::cout, std::cerr); }
