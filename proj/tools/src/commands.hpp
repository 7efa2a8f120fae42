#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace pourl::cli {

// Exit codes across all commands: 0 success, 1 runtime failure (including an
// invalid chain for verify), 2 config/file errors. Diagnostics go to stderr.
int cmd_run(const std::string& config_path, const std::optional<std::string>& out_override,
            std::optional<std::uint64_t> seed_override);
int cmd_verify(const std::string& chain_path);
int cmd_inspect(const std::string& chain_path, bool as_json);

}  // namespace pourl::cli
