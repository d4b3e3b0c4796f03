#include <iostream>
#include <string>
#include <vector>

#include "scorauc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scorauc::cli::run_command(args, std::cout, std::cerr);
}
