#include <vector>

#include "mixvar/cli.hpp"

int main(int argc, char** argv) {
  return mixvar::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
