#include <iostream>

#include "jclad/cli.hpp"

int main(int argc, char** argv) { return jclad::run_cli(argc, argv, std::cout, std::cerr); }
