#include <iostream>
#include <string>
#include <vector>

#include "neurodyn/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return neurodyn::cli::run(args, std::cout, std::cerr);
}
