#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ikf/errors.hpp"
#include "ikf/experiment.hpp"

namespace ikf::cli {

/// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kConfigError = 2,
    kIoError = 3,
    kRuntimeAbort = 4,
};

class ConfigError : public Error {
public:
    using Error::Error;
};

enum class OutputFormat { Csv, Svg, Both };

OutputFormat parse_format(const std::string& text);

struct CliConfig {
    ExperimentConfig experiment;
    std::filesystem::path out = "results.csv";
    OutputFormat format = OutputFormat::Csv;
    unsigned threads = 0;  // 0 = hardware concurrency
};

/// Parses a JSON config document. Every key is optional; unknown keys and
/// invalid values throw ConfigError.
CliConfig parse_config(const std::string& json_text);
CliConfig load_config(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ikf::cli
