// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "diffg/cli.hpp"

int main(int argc, char** argv) { return diffg::cli::run(argc, argv, std::cout, std::cerr, std::cin); }
