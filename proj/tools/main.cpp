#include <iostream>

#include "latebind/cli.hpp"

int main(int argc, char** argv) {
    return latebind::cli::run(argc, argv, std::cout, std::cerr);
}
