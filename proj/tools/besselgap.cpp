#include <iostream>

#include "besselgap/cli.hpp"

int main(int argc, char** argv) { return besselgap::cli::run(argc, argv, std::cout, std::cerr); }
