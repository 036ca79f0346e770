#include <iostream>

#include "fbmlab/cli.hpp"

int main(int argc, char** argv) { return fbmlab::run_cli(argc, argv, std::cout, std::cerr); }
