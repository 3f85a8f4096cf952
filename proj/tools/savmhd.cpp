#include <iostream>

#include "savmhd/app.hpp"

int main(int argc, char** argv) { return savmhd::app::run_cli(argc, argv, std::cout, std::cerr); }
