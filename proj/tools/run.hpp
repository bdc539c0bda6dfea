#pragma once

#include "optdes/io.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace optdes {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitPrecondition = 4;

// JSON schema of a run configuration.
const Json& config_schema();

// Sets the leaf at a dotted path ("options.multistarts=4"). The value is
// parsed as JSON when possible and kept as a string otherwise.
void apply_override(Json& config, const std::string& assignment);

struct RunOutcome {
  std::vector<std::filesystem::path> files;
  std::string summary;
};

// Validates the configuration, executes its task and writes the artifacts.
// Throws the library exceptions; see exit_code_for.
RunOutcome run_config(const Json& config);

// Maps the exception in flight to an exit code and writes its message.
int exit_code_for_current_exception(std::ostream& err);

}  // namespace optdes
