#include <iostream>

#include "hypfol/cli.hpp"

int main(int argc, char** argv) { return hypfol::cli::run(argc, argv, std::cout, std::cerr); }
