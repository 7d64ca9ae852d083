#include "pmcsens/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv + 1, argv + argc);
    const bool color = std::getenv("NO_COLOR") == nullptr && isatty(STDOUT_FILENO);
    return pmcsens::run_cli(args, std::cout, std::cerr, color);
}
