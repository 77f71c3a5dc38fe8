#include <iostream>
#include <string>
#include <vector>

#include "wgplvm/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wgplvm::run_cli(args, std::cout, std::cerr);
}
