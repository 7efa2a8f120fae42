#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pourl/sha256.hpp"

namespace pourl {

class Oracle;

// Environment state as recorded on chain: a fixed-length vector of doubles
// whose length is dictated by the environment.
using EnvState = std::vector<double>;

using ActionId = std::uint32_t;

// Sentinel for "no action" / "no author"; only the genesis block uses them.
inline constexpr ActionId kNoAction = 0xFFFFFFFFu;
inline constexpr std::uint32_t kNoAuthor = 0xFFFFFFFFu;

inline constexpr std::size_t kMaxPayloadBytes = std::size_t{1} << 20;

using BlockHash = Digest;

struct Block {
  std::uint64_t height = 0;
  EnvState state;                     // state after this block's action (S_{t+1})
  ActionId action = kNoAction;        // action that produced the state (A_t)
  double reward = 0.0;                // reward received for it (R_{t+1})
  std::vector<std::uint8_t> payload;  // opaque transaction data (D_{t+1})
  BlockHash prev_hash{};              // digest of the block at height-1; zero for genesis
  std::uint32_t author = kNoAuthor;   // node id of the miner
};

struct Chain {
  std::vector<Block> blocks;  // heights 0..n, genesis first

  std::size_t length() const { return blocks.size(); }
  bool empty() const { return blocks.empty(); }
  const Block& tip() const { return blocks.back(); }
};

// Fixed little-endian layout:
//   height u64 | state length u32 | state entries f64... | action u32 |
//   reward f64 | payload length u32 | payload bytes | prev_hash 32 bytes |
//   author u32
// Injective over all block fields, so the digest commits to every one.
std::vector<std::uint8_t> canonical_bytes(const Block& block);

// Exact inverse of canonical_bytes. Returns nullopt when the bytes are not a
// well-formed encoding (bad lengths, trailing garbage, oversized payload).
std::optional<Block> decode_canonical(std::span<const std::uint8_t> bytes);

// SHA-256 over canonical_bytes. A block at height k+1 stores this digest of
// the block at height k, which is what makes interior tampering evident.
BlockHash hash_block(const Block& block);

// Digest of the chain tip. Interior blocks are protected by their successor's
// prev_hash; the tip has no successor, so announcements carry this digest and
// receivers compare it before considering a chain.
BlockHash tip_digest(const Chain& chain);

enum class ChainError {
  HeightMismatch,     // height not contiguous with the tip / expected index
  HashMismatch,       // prev_hash does not match the predecessor's digest
  TransitionInvalid,  // oracle rejects the recorded (state, action, reward)
  GenesisInvalid,     // block 0 does not match the genesis convention
};

std::string to_string(ChainError error);

struct ValidationFailure {
  std::uint64_t height = 0;
  ChainError error = ChainError::GenesisInvalid;

  bool operator==(const ValidationFailure&) const = default;
};

// Genesis convention: height 0, state = oracle's initial state, sentinel
// action and author, zero reward, zero prev_hash, empty payload.
Block make_genesis(const Oracle& oracle);

// Appends iff the block extends the tip: height is tip+1, prev_hash matches
// the tip's digest, and the oracle verifies the recorded transition. On
// success the block is moved into the chain and nullopt is returned.
std::optional<ChainError> append_block(Chain& chain, Block block, const Oracle& oracle);

// Whole-chain check, reporting the lowest failing height of the first failing
// pass. Passes run in order: height contiguity, hash linkage over all
// adjacent pairs, genesis structure, then per-block transition verification.
// Linkage runs before transitions so that mutating any data field of block k
// is reported at height k+1, where the hash recursion breaks.
std::optional<ValidationFailure> validate_chain(const Chain& chain, const Oracle& oracle);

}  // namespace pourl
