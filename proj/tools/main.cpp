#include <iostream>

#include "netscat/cli.hpp"

int main(int argc, char** argv) { return netscat::run_cli(argc, argv, std::cout, std::cerr); }
