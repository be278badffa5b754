#include "gbd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gbd::cli::run(argc, argv, std::cout, std::cerr); }
