#include <iostream>

#include "rac/cli.hpp"

int main(int argc, char** argv) { return rac::run_cli(argc, argv, std::cout, std::cerr); }
