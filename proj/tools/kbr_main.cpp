#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "kbr/cli/run.hpp"
#include "kbr/error.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    const auto config = kbr::cli::parse_config(args);
    std::ostream& log = config.command == kbr::cli::Command::Help || config.command == kbr::cli::Command::Version
                            ? std::cout
                            : std::cerr;
    return kbr::cli::run(config, log);
  } catch (const kbr::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nrun 'kbr --help' for options\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
