#include <iostream>

#include "janus/cli.hpp"

int main(int argc, char** argv) { return janus::cli::main(argc, argv, std::cout, std::cerr); }
