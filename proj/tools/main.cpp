#include <iostream>

#include "chasm/cli.hpp"

int main(int argc, char** argv) { return chasm::run_cli(argc, argv, std::cout, std::cerr); }
