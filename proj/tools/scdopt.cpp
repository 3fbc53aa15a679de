#include <string>
#include <vector>

#include "scdopt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scdopt::cli::run(args);
}
