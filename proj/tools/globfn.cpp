#include <iostream>

#include "globfn/cli.hpp"

int main(int argc, char** argv) {
  try {
    return globfn::cli::run(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
