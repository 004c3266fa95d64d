#include <iostream>

#include <uniformizer/cli.hpp>

int main(int argc, char** argv) {
    return uniformizer::cli::main_entry(argc, argv, std::cin, std::cout, std::cerr);
}
