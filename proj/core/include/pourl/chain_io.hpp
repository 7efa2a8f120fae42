#pragma once

#include <string>
#include <variant>

#include "pourl/environment.hpp"
#include "pourl/hashchain.hpp"

namespace pourl {

// Chain dump file (.chain):
//   "PCHN" magic | u32 version | u32 header length | header JSON bytes |
//   records: u32 record length | canonical_bytes of the block | ...
// The header embeds the oracle name and GridWorld configuration so a dump can
// be verified without any other context. All integers little-endian.
inline constexpr std::uint32_t kChainFileVersion = 1;

bool write_chain_file(const std::string& path, const Chain& chain, const GridWorld& oracle);

enum class ChainLoadError {
  Unreadable,  // missing file / IO failure
  BadFormat,   // wrong magic or version, malformed header, truncated records
};

struct LoadedChain {
  Chain chain;
  GridWorldConfig grid;
};

std::variant<LoadedChain, ChainLoadError> load_chain_file(const std::string& path);

// One JSON object per block (hex digests and payload), for human inspection.
std::string chain_json_lines(const Chain& chain);

}  // namespace pourl
