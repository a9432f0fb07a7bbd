#include <iostream>
#include <string>
#include <vector>

#include "pgds/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return pgds::run_cli(args, std::cout, std::cerr);
}
