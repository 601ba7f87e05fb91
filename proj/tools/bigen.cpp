#include <iostream>
#include <string>
#include <vector>

#include "bigen/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bigen::runCli(args, std::cout, std::cerr);
}
