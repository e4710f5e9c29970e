#include <iostream>

#include "teamrank/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return teamrank::cli_main(args, std::cout, std::cerr);
}
