#include "cli.h"

#include <iostream>

int main(int argc, char **argv) {
  return nrep::cli::main(argc, argv, std::cout, std::cerr);
}
