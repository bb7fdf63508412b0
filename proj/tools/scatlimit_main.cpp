#include <iostream>

#include "scatlimit/cli_io.hpp"

int main(int argc, char** argv) { return scatlimit::run_cli(argc, argv, std::cout, std::cerr); }
