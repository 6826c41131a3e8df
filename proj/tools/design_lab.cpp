#include "design_lab/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return design_lab::run_cli(argc, argv, std::cout, std::cerr); }
