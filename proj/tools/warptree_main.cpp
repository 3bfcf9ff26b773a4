#include <iostream>

#include "warptree/cli.hpp"

int main(int argc, char** argv) { return warptree::run_cli(argc, argv, std::cout, std::cerr); }
