#include <iostream>

#include "persona_pong/cli.h"

int main(int argc, char** argv) {
  return persona_pong::RunCli(argc, argv, std::cout, std::cerr);
}
