#include <iostream>

#include "dover/cli.hpp"

int main(int argc, char** argv) { return dover::run_cli(argc, argv, std::cout, std::cerr); }
