#include "gaslin/cli.h"

#include <iostream>

int main(int argc, char** argv) {
    return gaslin::run_cli(argc, argv, std::cout, std::cerr);
}
