#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return m2sdf::cli::run(argc, argv, std::cout, std::cerr); }
