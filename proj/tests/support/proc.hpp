#pragma once

#include <string>
#include <sys/types.h>
#include <vector>

namespace testsupport {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

// Runs a shell command, capturing stdout; stderr passes through to the
// test log.
RunResult run_command(const std::string& command);

// fork+exec for long-running processes (the HTTP service under test).
pid_t spawn_process(const std::vector<std::string>& argv);
void stop_process(pid_t pid);

// Fresh working directory under the system temp root.
std::string make_temp_dir(const std::string& tag);

std::string cli_path();    // seal binary, baked in at compile time
std::string source_dir();  // repository root, for config/ fixtures

} // namespace testsupport
