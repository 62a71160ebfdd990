#include <iostream>

#include "tsbubble/cli.hpp"

int main(int argc, char** argv) { return tsbubble::cli::run(argc, argv, std::cout, std::cerr); }
