#include "cli_app.hpp"

int main(int argc, char** argv) {
    return ridesim::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
