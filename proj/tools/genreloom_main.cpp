#include <iostream>

#include "genreloom/cli.hpp"

int main(int argc, char** argv) { return genreloom::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
