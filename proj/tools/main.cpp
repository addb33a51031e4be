#include <iostream>

#include "secretsweep/cli.hpp"

int main(int argc, char** argv) { return secretsweep::run_cli(argc, argv, std::cout, std::cerr); }
