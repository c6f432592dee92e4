#include <string>
#include <vector>

#include "ecosim/cli/cli.hpp"

int main(int argc, char** argv) {
  return ecosim::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
