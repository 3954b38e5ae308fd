#include <iostream>

#include "fearcorr/cli.hpp"

int main(int argc, char** argv) { return fearcorr::run_cli(argc, argv, std::cout, std::cerr); }
