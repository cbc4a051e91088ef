#include <iostream>

#include "dpsub/cli.hpp"

int main(int argc, char** argv) { return dpsub::cli_main(argc, argv, std::cout, std::cerr); }
