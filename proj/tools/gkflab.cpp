#include <iostream>

#include "gkflab/cli.hpp"

int main(int argc, char** argv) { return gkflab::run_cli(argc, argv, std::cout, std::cerr); }
