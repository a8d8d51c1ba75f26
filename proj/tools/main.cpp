#include <iostream>

#include "cli_app.hpp"

int main(int argc, char** argv) {
    return sparsedetect::cli::run_app(argc, argv, std::cout, std::cerr);
}
