#include <string>
#include <vector>

#include "expskel/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return expskel::run_cli(args);
}
