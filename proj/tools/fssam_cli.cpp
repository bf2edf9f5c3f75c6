#include <iostream>

#include "fssam/cli.hpp"

int main(int argc, char** argv) { return fssam::cli_main(argc, argv, std::cout, std::cerr); }
