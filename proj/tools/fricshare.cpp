#include <iostream>

#include "fricshare/cli.hpp"

int main(int argc, char** argv) { return fricshare::cli::run(argc, argv, std::cout, std::cerr); }
