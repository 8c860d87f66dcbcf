#include <iostream>

#include "spnp/cli.hpp"

int main(int argc, char** argv) { return spnp::cli_main(argc, argv, std::cout, std::cerr); }
