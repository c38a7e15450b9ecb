#include <iostream>
#include <string>
#include <vector>

#include "mgmor/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return mgmor::run_cli(args, std::cout, std::cerr);
}
