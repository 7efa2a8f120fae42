#include "pourl/hashchain.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include "pourl/environment.hpp"

namespace pourl {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

// Cursor over an encoded block; every take_* reports failure via the ok flag
// so decode_canonical can reject malformed bytes without exceptions.
struct Reader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
  bool ok = true;

  bool take(std::size_t n, const std::uint8_t** out) {
    if (!ok || bytes.size() - pos < n) {
      ok = false;
      return false;
    }
    *out = bytes.data() + pos;
    pos += n;
    return true;
  }

  std::uint32_t take_u32() {
    const std::uint8_t* p = nullptr;
    if (!take(4, &p)) return 0;
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }

  std::uint64_t take_u64() {
    const std::uint8_t* p = nullptr;
    if (!take(8, &p)) return 0;
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }

  double take_f64() { return std::bit_cast<double>(take_u64()); }
};

bool bitwise_equal(const EnvState& a, const EnvState& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

// The state a transition out of `block` starts from: the recorded state, or
// the oracle's initial state when the block ended an episode.
const EnvState& source_state(const Block& block, const Oracle& oracle, EnvState& scratch) {
  if (oracle.is_terminal_state(block.state)) {
    scratch = oracle.initial_state();
    return scratch;
  }
  return block.state;
}

// Oracle check for `next` extending `prev`.
bool transition_ok(const Block& prev, const Block& next, const Oracle& oracle) {
  EnvState scratch;
  const EnvState& from = source_state(prev, oracle, scratch);
  const StepResult claimed{next.state, next.reward, oracle.is_terminal_state(next.state)};
  return verify_transition(oracle, from, next.action, claimed);
}

bool genesis_ok(const Block& block, const Oracle& oracle) {
  return block.height == 0 && block.action == kNoAction && block.reward == 0.0 &&
         block.prev_hash == BlockHash{} && block.author == kNoAuthor && block.payload.empty() &&
         bitwise_equal(block.state, oracle.initial_state());
}

}  // namespace

std::vector<std::uint8_t> canonical_bytes(const Block& block) {
  if (block.payload.size() > kMaxPayloadBytes) {
    throw std::length_error("block payload exceeds the 1 MiB bound");
  }
  std::vector<std::uint8_t> out;
  out.reserve(64 + block.state.size() * 8 + block.payload.size());
  put_u64(out, block.height);
  put_u32(out, static_cast<std::uint32_t>(block.state.size()));
  for (double v : block.state) put_f64(out, v);
  put_u32(out, block.action);
  put_f64(out, block.reward);
  put_u32(out, static_cast<std::uint32_t>(block.payload.size()));
  out.insert(out.end(), block.payload.begin(), block.payload.end());
  out.insert(out.end(), block.prev_hash.begin(), block.prev_hash.end());
  put_u32(out, block.author);
  return out;
}

std::optional<Block> decode_canonical(std::span<const std::uint8_t> bytes) {
  Reader r{bytes};
  Block block;
  block.height = r.take_u64();
  const std::uint32_t state_len = r.take_u32();
  if (!r.ok || state_len > bytes.size() / 8 + 1) return std::nullopt;
  block.state.resize(state_len);
  for (auto& v : block.state) v = r.take_f64();
  block.action = r.take_u32();
  block.reward = r.take_f64();
  const std::uint32_t payload_len = r.take_u32();
  if (!r.ok || payload_len > kMaxPayloadBytes) return std::nullopt;
  const std::uint8_t* payload = nullptr;
  if (!r.take(payload_len, &payload)) return std::nullopt;
  block.payload.assign(payload, payload + payload_len);
  const std::uint8_t* hash = nullptr;
  if (!r.take(block.prev_hash.size(), &hash)) return std::nullopt;
  std::memcpy(block.prev_hash.data(), hash, block.prev_hash.size());
  block.author = r.take_u32();
  if (!r.ok || r.pos != bytes.size()) return std::nullopt;
  return block;
}

BlockHash hash_block(const Block& block) {
  const auto bytes = canonical_bytes(block);
  return sha256(bytes);
}

BlockHash tip_digest(const Chain& chain) { return hash_block(chain.tip()); }

std::string to_string(ChainError error) {
  switch (error) {
    case ChainError::HeightMismatch: return "height mismatch";
    case ChainError::HashMismatch: return "hash mismatch";
    case ChainError::TransitionInvalid: return "transition invalid";
    case ChainError::GenesisInvalid: return "genesis invalid";
  }
  return "unknown";
}

Block make_genesis(const Oracle& oracle) {
  Block genesis;
  genesis.state = oracle.initial_state();
  return genesis;  // sentinel action/author, zero reward/prev_hash by default
}

std::optional<ChainError> append_block(Chain& chain, Block block, const Oracle& oracle) {
  if (chain.empty()) {
    if (!genesis_ok(block, oracle)) return ChainError::GenesisInvalid;
    chain.blocks.push_back(std::move(block));
    return std::nullopt;
  }
  const Block& tip = chain.tip();
  if (block.height != tip.height + 1) return ChainError::HeightMismatch;
  if (block.prev_hash != hash_block(tip)) return ChainError::HashMismatch;
  if (!transition_ok(tip, block, oracle)) return ChainError::TransitionInvalid;
  chain.blocks.push_back(std::move(block));
  return std::nullopt;
}

std::optional<ValidationFailure> validate_chain(const Chain& chain, const Oracle& oracle) {
  if (chain.empty()) return ValidationFailure{0, ChainError::GenesisInvalid};

  for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
    if (chain.blocks[i].height != i) return ValidationFailure{i, ChainError::HeightMismatch};
  }

  // Hash linkage over the whole chain before any content checks: a mutated
  // data field in block k breaks the recursion at k+1, and that is the height
  // reported even though the transition check would also flag k itself.
  for (std::size_t i = 1; i < chain.blocks.size(); ++i) {
    if (chain.blocks[i].prev_hash != hash_block(chain.blocks[i - 1])) {
      return ValidationFailure{i, ChainError::HashMismatch};
    }
  }

  if (!genesis_ok(chain.blocks.front(), oracle)) {
    return ValidationFailure{0, ChainError::GenesisInvalid};
  }

  for (std::size_t i = 1; i < chain.blocks.size(); ++i) {
    if (!transition_ok(chain.blocks[i - 1], chain.blocks[i], oracle)) {
      return ValidationFailure{i, ChainError::TransitionInvalid};
    }
  }
  return std::nullopt;
}

}  // namespace pourl
