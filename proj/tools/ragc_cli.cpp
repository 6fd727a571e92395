#include <iostream>
#include <string>
#include <vector>

#include "ragc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ragc::run_cli(args, std::cout, std::cerr);
}
