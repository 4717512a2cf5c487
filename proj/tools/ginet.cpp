#include <iostream>
#include <string>
#include <vector>

#include "ginet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ginet::cli::run(args, std::cout, std::cerr);
}
