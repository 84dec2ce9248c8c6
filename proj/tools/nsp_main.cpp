#include "nsp/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return nsp::run_cli(argc, argv, std::cout, std::cerr); }
