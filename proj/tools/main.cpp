#include <iostream>

#include "gibert/tools/commands.hpp"

int main(int argc, char** argv) { return gibert::tools::run_cli(argc, argv, std::cout, std::cerr); }
