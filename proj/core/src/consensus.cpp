#include "pourl/consensus.hpp"

#include <map>

#include "fmt.hpp"

namespace pourl {

std::string to_string(TieBreakRule rule) {
  switch (rule) {
    case TieBreakRule::LastReward: return "last_reward";
    case TieBreakRule::SumReward: return "sum_reward";
  }
  return "unknown";
}

double chain_reward_sum(const Chain& chain) {
  double sum = 0.0;
  for (const Block& block : chain.blocks) sum += block.reward;
  return sum;
}

ForkChoice fork_choice(const Chain& local, const Chain& candidate, TieBreakRule rule,
                       const Oracle& oracle) {
  if (validate_chain(candidate, oracle)) return ForkChoice::RejectInvalid;

  if (candidate.length() != local.length()) {
    return candidate.length() > local.length() ? ForkChoice::AdoptCandidate
                                               : ForkChoice::KeepLocal;
  }

  const double local_score =
      rule == TieBreakRule::LastReward ? local.tip().reward : chain_reward_sum(local);
  const double candidate_score =
      rule == TieBreakRule::LastReward ? candidate.tip().reward : chain_reward_sum(candidate);
  if (candidate_score != local_score) {
    return candidate_score > local_score ? ForkChoice::AdoptCandidate : ForkChoice::KeepLocal;
  }

  // Scores tie exactly: the lexicographically smaller tip digest wins, which
  // keeps the order total and is symmetric under swapping the arguments.
  return tip_digest(candidate) < tip_digest(local) ? ForkChoice::AdoptCandidate
                                                   : ForkChoice::KeepLocal;
}

std::vector<LedgerEntry> compute_awards(const Chain& chain) {
  std::map<std::uint32_t, double> totals;
  for (std::size_t i = 1; i < chain.blocks.size(); ++i) {
    totals[chain.blocks[i].author] += chain.blocks[i].reward;
  }
  std::vector<LedgerEntry> entries;
  entries.reserve(totals.size());
  for (const auto& [node, award] : totals) entries.push_back(LedgerEntry{node, award});
  return entries;
}

std::string awards_csv(const std::vector<LedgerEntry>& entries) {
  std::string out = "node_id,award\n";
  for (const LedgerEntry& entry : entries) {
    out += std::to_string(entry.node);
    out += ',';
    out += format_double(entry.award);
    out += '\n';
  }
  return out;
}

}  // namespace pourl
