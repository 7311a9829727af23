#include "wbplan/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return wbplan::cli_main(argc, argv, std::cout, std::cerr); }
