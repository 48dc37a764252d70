#include <iostream>
#include <string>
#include <vector>

#include "hdcov/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return hdcov::run_cli(args, std::cout, std::cerr);
}
