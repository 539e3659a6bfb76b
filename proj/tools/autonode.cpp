#include <iostream>

#include "autonode/cli.hpp"

int main(int argc, char** argv) { return autonode::cli::dispatch(argc, argv, std::cout, std::cerr); }
