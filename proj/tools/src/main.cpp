#include <iostream>

#include "funflow_cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return funflow::cli::run(args, std::cout, std::cerr);
}
