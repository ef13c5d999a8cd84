#include <blockaxioms/cli.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    std::cout << blockaxioms::cli::usage();
    return args.empty() ? 2 : 0;
  }
  try {
    return blockaxioms::cli::run(blockaxioms::cli::parse_config(args));
  } catch (const blockaxioms::cli::ConfigError& e) {
    std::cerr << "blockaxioms: " << e.what() << "\n";
    return 2;
  }
}
