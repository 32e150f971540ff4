#include <iostream>

#include "factorfuse/cli.hpp"

int main(int argc, char** argv) { return factorfuse::cli::run(argc, argv, std::cout, std::cerr); }
