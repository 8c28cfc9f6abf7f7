#include <iostream>
#include <string>
#include <vector>

#include "radarest/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return radarest::cli_run(args, std::cout, std::cerr);
}
