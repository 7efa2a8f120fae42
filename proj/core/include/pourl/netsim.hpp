#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pourl/node.hpp"

namespace pourl {

struct PartitionSpec {
  double start = 0.0;
  double end = 0.0;
  std::vector<std::uint32_t> side_a;  // the rest of the nodes form side B
};

struct SimConfig {
  std::uint32_t node_count = 1;
  std::uint64_t seed = 0;
  // One entry per node, or a single entry broadcast to all nodes. The mean of
  // the exponential mining duration: smaller means more compute power.
  std::vector<double> mean_mine_time{1.0};
  double mean_link_delay = 0.1;
  double drop_probability = 0.0;  // applied per (announcement, peer), in [0, 1)
  std::vector<PartitionSpec> partitions;
  std::uint64_t max_blocks = 100;     // stop once any tip reaches this height
  TieBreakRule tie_break = TieBreakRule::LastReward;
  std::optional<double> stop_time;    // stop the clock here even if max_blocks is not reached
  std::vector<std::uint8_t> payload;  // stamped into every mined block
};

struct MetricRow {
  double time = 0.0;
  std::uint32_t node = 0;
  std::string kind;  // "mine" | "adopt"
  std::uint64_t height = 0;
  double value = 0.0;                // mine: block reward; adopt: reorg depth
  std::optional<double> moving_avg;  // mine rows: mean reward over the node's last 200 mined blocks
};

struct PartitionReport {
  double start = 0.0;
  double end = 0.0;
  // Best chain tip on each side at the moment the partition heals, and the
  // fork-choice winner between them; after the flush every node's tip must
  // equal the predicted winner.
  BlockHash tip_a{};
  BlockHash tip_b{};
  BlockHash predicted_winner{};
  double convergence_time_after_heal = 0.0;
};

struct NodeReport {
  std::uint32_t id = 0;
  std::uint64_t final_height = 0;
  BlockHash tip{};
  std::uint64_t mined = 0;
  std::uint64_t announcements_received = 0;
  std::uint64_t adoptions = 0;
  std::uint64_t fork_events = 0;  // adoptions that replaced at least one block
  std::map<std::uint64_t, std::uint64_t> reorg_depth_histogram;
  // Learning-progress summaries over the node's final chain / mined blocks.
  std::optional<std::uint64_t> blocks_to_first_goal;  // height of the first episode end
  std::uint64_t goal_episodes = 0;
  std::optional<double> first200_avg_reward;
  std::optional<double> last200_avg_reward;
};

struct SimReport {
  std::uint32_t node_count = 0;
  std::uint64_t seed = 0;
  TieBreakRule tie_break = TieBreakRule::LastReward;
  double end_time = 0.0;  // time of the last processed event, flush included
  bool converged = false;
  BlockHash tip{};  // common tip when converged (node 0's tip otherwise)
  std::vector<NodeReport> nodes;
  std::vector<PartitionReport> partitions;
  std::vector<MetricRow> metrics;
  std::vector<Chain> final_chains;
  std::vector<NetworkParams> final_params;
};

// Seeded discrete-event simulation of node_count miners gossiping full-chain
// announcements over lossy, delayed links.
//
// Event loop: every node starts a mining job whose completion is scheduled at
// now + Exp(mean_mine_time). When it fires (and was not aborted), the node
// runs one mine_one_block iteration, appends, and announces its chain to each
// peer with an independent Exp(mean_link_delay) delay; each announcement is
// independently dropped with drop_probability and blocked while a partition
// separates the pair at send or arrival time. A delivered announcement goes
// through fork choice; adoption rebuilds the replay buffer, aborts the
// in-flight mining job, and schedules a fresh one.
//
// After the stop condition (max_blocks on any node, or stop_time), a
// quiescence flush delivers all pending announcements and runs one all-to-all
// announcement round with no drops; because fork choice is a total order,
// every node then holds the globally best chain, which makes convergence
// assertions well-defined.
//
// Identical configs produce bit-identical reports, metrics, and chains.
// Throws std::invalid_argument on malformed configs.
SimReport run_simulation(const SimConfig& config, const Oracle& oracle,
                         const LearningConfig& learning);

struct AttackCase {
  std::uint64_t seed = 0;
  std::uint64_t chain_length = 0;  // equal for both sides by construction
  double honest_tip_reward = 0.0;
  double attacker_tip_reward = 0.0;
  double honest_reward_sum = 0.0;
  double attacker_reward_sum = 0.0;
  bool survived_last_reward = false;  // honest chain kept under rule 2a
  bool survived_sum_reward = false;   // honest chain kept under rule 2b
};

struct AttackReport {
  std::uint32_t honest_count = 0;
  std::uint32_t attacker_count = 0;
  std::uint64_t tamper_height = 0;
  std::uint32_t cases_run = 0;
  double survival_fraction_last_reward = 0.0;
  double survival_fraction_sum_reward = 0.0;
  std::vector<AttackCase> cases;
  Chain honest_example;    // chains of the first case, for dumping/inspection
  Chain attacker_example;
};

// The 51%-attack experiment, measured rather than asserted. Per case: run an
// honest simulation with honest_count nodes; attackers then fork the
// consented chain at tamper_height by replacing that block's payload (the
// transition itself cannot be forged -- validation would catch it), remine
// forward with their own fresh agents to equal length, and race the honest
// chain through fork choice. Reports per-case tip rewards, reward sums, and
// per-rule honest-survival fractions across case_count derived seeds.
AttackReport run_attack_scenario(const SimConfig& config, const Oracle& oracle,
                                 const LearningConfig& learning, std::uint32_t honest_count,
                                 std::uint32_t attacker_count, std::uint64_t tamper_height,
                                 std::uint32_t case_count);

// Deterministic text renderings (stable column order, shortest-round-trip
// float formatting), so identical runs produce identical bytes.
std::string metrics_csv(const std::vector<MetricRow>& rows);
std::string report_json(const SimReport& report, const std::string& scenario);
std::string attack_report_json(const AttackReport& report, const SimConfig& config);

}  // namespace pourl
