#include <iostream>

#include "mmobs/cli.hpp"

int main(int argc, char** argv) { return mmobs::cli::run(argc, argv, std::cout, std::cerr); }
