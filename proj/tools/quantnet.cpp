#include <iostream>

#include "quantnet/cli.hpp"

int main(int argc, char** argv) { return quantnet::cli::main(argc, argv, std::cout, std::cerr); }
