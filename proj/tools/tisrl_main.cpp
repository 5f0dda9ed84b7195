#include <iostream>

#include "tisrl/cli.hpp"

int main(int argc, char** argv) {
  return tisrl::run_cli(argc, argv, std::cout, std::cerr);
}
