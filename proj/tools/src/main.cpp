#include <iostream>

#include "parfluor_cli/commands.hpp"

int main(int argc, char** argv) {
  return parfluor::cli::run(argc, argv, std::cout, std::cerr);
}
