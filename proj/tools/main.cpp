#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return matprop::cli_main(argc, argv, std::cout, std::cerr); }
