#include <iostream>

#include "malrag/cli.hpp"

int main(int argc, char** argv) {
    return malrag::run_cli(argc, argv, std::cout, std::cerr);
}
