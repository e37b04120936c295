#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return tgcli::run(argc, argv, std::cout, std::cerr); }
