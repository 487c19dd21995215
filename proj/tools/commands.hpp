#pragma once

#include <CLI11.hpp>
#include <functional>

namespace tablatex::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kOperationalError = 1;
inline constexpr int kVerificationFailure = 2;

// Registers every subcommand on `app`; the returned callback runs whichever
// one was selected and yields its exit code.
std::function<int()> register_commands(CLI::App& app);

}  // namespace tablatex::cli
