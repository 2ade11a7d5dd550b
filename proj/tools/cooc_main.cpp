#include <iostream>

#include "cooc/cli/commands.hpp"

int main(int argc, char** argv) { return cooc::cli::run(argc, argv, std::cout, std::cerr); }
