#include <iostream>

#include "heunlock/cli.hpp"

int main(int argc, char** argv) {
  return heunlock::run_cli(argc, argv, std::cout, std::cerr);
}
