#include <iostream>
#include <string>
#include <vector>

#include "rbkit/cli_app.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return rbkit::run_cli(args, std::cout, std::cerr);
}
