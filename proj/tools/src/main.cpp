#include <iostream>
#include <string>
#include <vector>

#include "mfood/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mfood::cli::run(args, std::cout, std::cerr);
}
