#include <iostream>

#include "eshelby/cli.hpp"

int main(int argc, char** argv) { return eshelby::cli::run(argc, argv, std::cout, std::cerr); }
