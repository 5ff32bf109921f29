#include <string>
#include <vector>

#include "jeffmix/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return jeffmix::cli::dispatch(args);
}
