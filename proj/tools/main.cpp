#include <iostream>

#include "f3/cli.hpp"

int main(int argc, char** argv) { return f3::execute_command(argc, argv, std::cout, std::cerr); }
