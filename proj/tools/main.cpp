#include <iostream>
#include <string>
#include <vector>

#include "fairgap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fairgap::run_cli(args, std::cout, std::cerr);
}
