#include <iostream>

#include "cpelt/cli/dispatch.hpp"

int main(int argc, char** argv) { return cpelt::cli::dispatch(argc, argv, std::cout, std::cerr); }
