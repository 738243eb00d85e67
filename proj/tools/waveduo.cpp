#include "waveduo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return waveduo::cli::main(argc, argv, std::cout, std::cerr); }
