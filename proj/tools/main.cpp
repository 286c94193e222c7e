#include <iostream>
#include <string>
#include <vector>

#include "buildimpact/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return buildimpact::run_cli(args, std::cout, std::cerr);
}
