#include <vector>

#include "tabrl/cli.hpp"

int main(int argc, char** argv) {
    return tabrl::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
