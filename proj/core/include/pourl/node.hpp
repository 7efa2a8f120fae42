#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pourl/consensus.hpp"
#include "pourl/dqn.hpp"

namespace pourl {

// A mining job handed to the driver. The driver decides when it finishes;
// job_seq lets stale completions (aborted by a reorg) be recognized.
struct PendingJob {
  BlockHash tip;
  std::uint64_t job_seq = 0;
};

struct NodeHandle {
  std::uint32_t id = 0;
  AgentState agent;
  Chain chain;
  std::optional<PendingJob> pending;  // owned by the driver (see netsim)
  std::uint64_t next_job_seq = 0;
};

struct StartMining {};
struct MiningFinished {
  Block block;  // must come from this node's pending job
};
struct ChainAnnounced {
  Chain chain;
  BlockHash tip;  // digest the sender claims for chain.tip()
  std::uint32_t from = 0;
};
using NodeInput = std::variant<StartMining, MiningFinished, ChainAnnounced>;

enum class IgnoreReason { Shorter, LostTieBreak, Invalid };
std::string to_string(IgnoreReason reason);

struct Announce {
  Chain chain;
  BlockHash tip;
};
struct RequestMining {
  Block tip;  // mine on top of this block
};
struct Ignore {
  IgnoreReason reason = IgnoreReason::Invalid;
};
using NodeOutput = std::variant<Announce, RequestMining, Ignore>;

NodeHandle make_node(std::uint32_t id, const Oracle& oracle, const LearningConfig& learning,
                     const Chain& genesis_chain);

// The per-node state machine, pure in the sense that identical node state and
// input always produce identical outputs and successor state.
//   StartMining    -> RequestMining(tip)
//   MiningFinished -> append locally, Announce + RequestMining(new tip)
//   ChainAnnounced -> check the announced tip digest, validate, fork_choice;
//                     adopt: rebuild replay, RequestMining(new tip);
//                     otherwise Ignore(Shorter | LostTieBreak | Invalid)
// Local chain length never decreases except through adoption of a chain that
// won fork choice, and every Announce emitted passes validate_chain.
std::vector<NodeOutput> handle_input(NodeHandle& node, NodeInput input, const Oracle& oracle,
                                     TieBreakRule rule);

}  // namespace pourl
