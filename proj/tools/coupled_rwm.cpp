#include <iostream>

#include "coupled_rwm/cli.hpp"

int main(int argc, char **argv) {
  return crwm::run_cli(argc, argv, std::cout, std::cerr);
}
