#include <iostream>

#include "semicap/cli.hpp"

int main(int argc, char** argv) {
    return semicap::run_cli(argc, argv, std::cout, std::cerr);
}
