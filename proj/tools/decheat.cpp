#include "decheat/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return decheat::cli::main(argc, argv, std::cout, std::cerr);
}
