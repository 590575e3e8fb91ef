#include <iostream>

#include "liel/cli.hpp"

int main(int argc, char** argv) { return liel::cli::run(argc, argv, std::cout, std::cerr); }
