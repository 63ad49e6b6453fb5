#include <iostream>

#include "hipcap/cli/app.hpp"

int main(int argc, char** argv) { return hipcap::cli::run(argc, argv, std::cout, std::cerr); }
