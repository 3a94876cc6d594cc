#pragma once

#include <stdexcept>
#include <string>

namespace biasloupe {

// Error taxonomy mirrors the CLI exit codes: config/input validation (1),
// generation (2), analysis/ranking/report (3).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Unreadable or malformed input/output files.
struct IoError : Error {
    using Error::Error;
};

struct GenerationError : Error {
    using Error::Error;
};

struct AnalysisError : Error {
    using Error::Error;
};

// Warnings go to stderr; callers cannot suppress them but they never abort a run.
void warn(const std::string& message);

} // namespace biasloupe
