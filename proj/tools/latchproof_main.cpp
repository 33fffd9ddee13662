#include <iostream>

#include "latchproof/cli.hpp"

int main(int argc, char** argv) { return latchproof::run_cli(argc, argv, std::cout, std::cerr); }
