#include <iostream>

#include "ddos/cli.hpp"

int main(int argc, char** argv) {
    return ddos::run_cli(argc, argv, std::cout, std::cerr);
}
