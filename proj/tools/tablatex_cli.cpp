#include <iostream>

#include "commands.hpp"
#include "tablatex/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"LaTeX table recognition: dataset building, training, prediction, evaluation"};
  app.require_subcommand(1);
  auto run = tablatex::cli::register_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? tablatex::cli::kOk : tablatex::cli::kOperationalError;
  }
  try {
    return run();
  } catch (const tablatex::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return tablatex::cli::kOperationalError;
}
