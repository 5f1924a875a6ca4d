#include <iostream>

#include "mpmab/cli.hpp"

int main(int argc, char** argv) { return mpmab::run_cli(argc, argv, std::cout, std::cerr); }
