#include <string>
#include <vector>

#include "creepdb/app/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return creepdb::app::cli_run(args);
}
