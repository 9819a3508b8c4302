#include <iostream>

#include "evfilter/cli.hpp"

int main(int argc, char** argv) { return evfilter::cli::run_cli(argc, argv, std::cout, std::cerr); }
