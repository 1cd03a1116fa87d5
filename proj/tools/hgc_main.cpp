#include <iostream>

#include "hgc/cli.hpp"

int main(int argc, char** argv) { return hgc::run_cli(argc, argv, std::cout, std::cerr); }
