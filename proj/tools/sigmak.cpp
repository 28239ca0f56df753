#include <iostream>

#include "sigmak/cli.hpp"

int main(int argc, char** argv) { return sigmak::cli::main(argc, argv, std::cout, std::cerr); }
