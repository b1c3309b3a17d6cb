#include <iostream>

#include "gearnet/cli/app.hpp"

int main(int argc, char** argv) { return gearnet::cli::run(argc, argv, std::cout, std::cerr); }
