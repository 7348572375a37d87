#include <iostream>

#include "nffd/cli.hpp"

int main(int argc, char** argv) { return nffd::cli::run(argc, argv, std::cout, std::cerr); }
