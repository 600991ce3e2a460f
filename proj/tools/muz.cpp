#include <iostream>

#include "muz/cli.hpp"

int main(int argc, char** argv) { return muz::cli_main(argc, argv, std::cout, std::cerr); }
