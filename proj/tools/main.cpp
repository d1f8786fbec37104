#include <iostream>

#include "aurora/cli.hpp"

int main(int argc, char** argv) { return aurora::run_cli(argc, argv, std::cout, std::cerr); }
