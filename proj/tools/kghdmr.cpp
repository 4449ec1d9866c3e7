#include "kghdmr/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return kghdmr::cli::run(argc, argv, std::cout, std::cerr); }
