#include <iostream>

#include "planestack/cli.hpp"

int main(int argc, char** argv) {
    return planestack::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
