#include "fuchsian/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return fuchsian::run_cli(argc, argv, std::cout, std::cerr); }
