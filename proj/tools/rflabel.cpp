#include <iostream>

#include "rflabel/cli.hpp"

int main(int argc, char** argv) {
  return rflabel::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
