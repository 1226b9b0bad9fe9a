#include <iostream>
#include <string>
#include <vector>

#include "prkg/cli.hpp"

extern char** environ;

int main(int argc, char** argv) {
  prkg::cli::Environment env;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    auto eq = entry.find('=');
    if (eq != std::string::npos) env[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  std::vector<std::string> args(argv + 1, argv + argc);
  return prkg::cli::run(args, env, std::cout, std::cerr);
}
