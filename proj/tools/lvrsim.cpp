#include <string>
#include <vector>

#include "lvr/cli.hpp"

int main(int argc, char** argv) {
    return lvr::cli::run(std::vector<std::string>(argv, argv + argc));
}
