#include <iostream>
#include <string>
#include <vector>

#include "globalsdp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return globalsdp::cli::run(args, std::cout, std::cerr);
}
