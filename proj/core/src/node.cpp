#include "pourl/node.hpp"

#include <utility>

namespace pourl {
namespace {

std::vector<NodeOutput> on_start(NodeHandle& node) {
  return {RequestMining{node.chain.tip()}};
}

std::vector<NodeOutput> on_mining_finished(NodeHandle& node, MiningFinished msg,
                                           const Oracle& oracle) {
  // The driver only feeds completions for the current job, so this append
  // extends the tip the block was mined on.
  if (append_block(node.chain, std::move(msg.block), oracle)) {
    return {Ignore{IgnoreReason::Invalid}};
  }
  return {Announce{node.chain, tip_digest(node.chain)}, RequestMining{node.chain.tip()}};
}

std::vector<NodeOutput> on_chain_announced(NodeHandle& node, ChainAnnounced msg,
                                           const Oracle& oracle, TieBreakRule rule) {
  if (msg.chain.empty() || tip_digest(msg.chain) != msg.tip) {
    return {Ignore{IgnoreReason::Invalid}};
  }
  switch (fork_choice(node.chain, msg.chain, rule, oracle)) {
    case ForkChoice::RejectInvalid:
      return {Ignore{IgnoreReason::Invalid}};
    case ForkChoice::KeepLocal:
      return {Ignore{msg.chain.length() < node.chain.length() ? IgnoreReason::Shorter
                                                              : IgnoreReason::LostTieBreak}};
    case ForkChoice::AdoptCandidate:
      break;
  }
  node.chain = std::move(msg.chain);
  rebuild_replay_from_chain(node.agent, node.chain, oracle);
  // Adoption restarts mining on the new tip but is not re-announced; the
  // originator's announcement is already making the rounds.
  return {RequestMining{node.chain.tip()}};
}

}  // namespace

std::string to_string(IgnoreReason reason) {
  switch (reason) {
    case IgnoreReason::Shorter: return "shorter";
    case IgnoreReason::LostTieBreak: return "lost_tie_break";
    case IgnoreReason::Invalid: return "invalid";
  }
  return "unknown";
}

NodeHandle make_node(std::uint32_t id, const Oracle& oracle, const LearningConfig& learning,
                     const Chain& genesis_chain) {
  NodeHandle node{id, make_agent(oracle, learning), genesis_chain, std::nullopt, 0};
  return node;
}

std::vector<NodeOutput> handle_input(NodeHandle& node, NodeInput input, const Oracle& oracle,
                                     TieBreakRule rule) {
  if (std::holds_alternative<StartMining>(input)) return on_start(node);
  if (auto* finished = std::get_if<MiningFinished>(&input)) {
    return on_mining_finished(node, std::move(*finished), oracle);
  }
  return on_chain_announced(node, std::move(std::get<ChainAnnounced>(input)), oracle, rule);
}

}  // namespace pourl
