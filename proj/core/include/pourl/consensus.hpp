#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pourl/environment.hpp"
#include "pourl/hashchain.hpp"

namespace pourl {

enum class TieBreakRule {
  LastReward,  // equal lengths: compare the reward recorded at the tip
  SumReward,   // equal lengths: compare the sum of rewards over all blocks
};

std::string to_string(TieBreakRule rule);

enum class ForkChoice { KeepLocal, AdoptCandidate, RejectInvalid };

// Longest chain wins outright; equal lengths fall back to the tie-break
// rule; exact reward ties go to the lexicographically smaller tip digest.
// The candidate is fully re-validated first. Together these make fork choice
// a deterministic total order: swapping the arguments never changes which
// chain wins, so every node converges on the same chain given the same set.
ForkChoice fork_choice(const Chain& local, const Chain& candidate, TieBreakRule rule,
                       const Oracle& oracle);

double chain_reward_sum(const Chain& chain);

struct LedgerEntry {
  std::uint32_t node = 0;
  double award = 0.0;

  bool operator==(const LedgerEntry&) const = default;
};

// Credits each non-genesis block's recorded reward to its author,
// aggregated per author and sorted by node id. Always recomputed from the
// chain passed in, so a reorg automatically rewrites history.
std::vector<LedgerEntry> compute_awards(const Chain& chain);

// CSV export with header "node_id,award".
std::string awards_csv(const std::vector<LedgerEntry>& entries);

}  // namespace pourl
