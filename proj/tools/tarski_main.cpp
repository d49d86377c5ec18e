#include <iostream>

#include "tarski/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tarski::cli::dispatch(args, std::cout, std::cerr);
}
