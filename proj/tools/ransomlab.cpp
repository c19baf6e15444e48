#include <iostream>

#include "ransomlab/cli.hpp"

int main(int argc, char** argv)
{
    return ransomlab::cli::run(argc, argv, std::cout, std::cerr);
}
