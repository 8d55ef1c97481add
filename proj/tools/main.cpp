#include <iostream>

#include "bgcount/cli.hpp"

int main(int argc, char** argv) { return bgcount::run_cli(argc, argv, std::cout, std::cerr); }
