#include <iostream>

#include "kirchnet/cli.hpp"

int main(int argc, char** argv) {
  return kirchnet::run_cli(argc, argv, std::cout, std::cerr);
}
