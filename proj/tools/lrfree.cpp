#include <iostream>
#include <string>
#include <vector>

#include "lrfree/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return lrfree::cli::main(args, std::cout, std::cerr);
}
