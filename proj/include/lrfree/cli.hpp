#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lrfree::cli {

enum class Command { Run, Sweep, Gradcheck, Invariants, List };

struct Invocation {
    Command command = Command::List;
    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    std::string suite = "all";
    std::size_t threads = 1;
    bool verbose = false;
};

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRunFailure = 1;
inline constexpr int kUsage = 2;

struct ParseOutcome {
    std::optional<Invocation> invocation;
    int exit_code = kOk;  // meaningful when invocation is empty
    std::string message;  // help or usage text
};

/// `args` excludes the program name.
ParseOutcome parse_args(const std::vector<std::string>& args);

int execute(const Invocation& invocation, std::ostream& out, std::ostream& err);

/// parse_args + execute, printing help to `out` and usage errors to `err`.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lrfree::cli
