#include "pourl/netsim.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "fmt.hpp"
#include "pourl/log.hpp"
#include "pourl/sha256.hpp"

namespace pourl {
namespace {

enum class EventKind { MineComplete, Deliver, PartitionEnd };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;  // insertion order, breaks timestamp ties FIFO
  EventKind kind = EventKind::MineComplete;
  std::uint32_t node = 0;     // MineComplete: the miner; Deliver: the recipient
  std::uint64_t job_seq = 0;  // MineComplete: job this completion belongs to
  std::uint32_t from = 0;     // Deliver: sender
  Chain chain;                // Deliver: announced chain snapshot
  BlockHash tip{};            // Deliver: digest the sender claims
  std::size_t partition = 0;  // PartitionEnd: index into config.partitions
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct NodeStats {
  std::uint64_t mined = 0;
  std::uint64_t announcements_received = 0;
  std::uint64_t adoptions = 0;
  std::uint64_t fork_events = 0;
  std::map<std::uint64_t, std::uint64_t> reorg_depth_histogram;
  std::vector<double> mined_rewards;
  double window_sum = 0.0;  // sum of the last <=200 entries of mined_rewards
};

constexpr std::size_t kRewardWindow = 200;

void validate_config(const SimConfig& config) {
  if (config.node_count == 0) throw std::invalid_argument("node_count must be positive");
  if (config.mean_mine_time.size() != 1 && config.mean_mine_time.size() != config.node_count) {
    throw std::invalid_argument("mean_mine_time needs one entry or one per node");
  }
  for (double m : config.mean_mine_time) {
    if (!(m > 0.0)) throw std::invalid_argument("mean_mine_time entries must be positive");
  }
  if (!(config.mean_link_delay > 0.0)) {
    throw std::invalid_argument("mean_link_delay must be positive");
  }
  if (!(config.drop_probability >= 0.0 && config.drop_probability < 1.0)) {
    throw std::invalid_argument("drop_probability must lie in [0, 1)");
  }
  if (config.max_blocks == 0) throw std::invalid_argument("max_blocks must be positive");
  if (config.stop_time && !(*config.stop_time > 0.0)) {
    throw std::invalid_argument("stop_time must be positive");
  }
  if (config.payload.size() > kMaxPayloadBytes) {
    throw std::invalid_argument("payload exceeds the block payload limit");
  }
  for (const PartitionSpec& p : config.partitions) {
    if (!(p.start >= 0.0) || !(p.end > p.start)) {
      throw std::invalid_argument("partition window must satisfy 0 <= start < end");
    }
    for (std::uint32_t id : p.side_a) {
      if (id >= config.node_count) throw std::invalid_argument("partition names an unknown node");
    }
  }
  for (std::size_t i = 0; i < config.partitions.size(); ++i) {
    for (std::size_t j = i + 1; j < config.partitions.size(); ++j) {
      const PartitionSpec& a = config.partitions[i];
      const PartitionSpec& b = config.partitions[j];
      if (a.start < b.end && b.start < a.end) {
        throw std::invalid_argument("partition windows must not overlap");
      }
    }
  }
}

// Number of old-chain blocks discarded by replacing `before` with `after`:
// the suffix of `before` past the longest common prefix.
std::uint64_t reorg_depth(const Chain& before, const Chain& after) {
  const std::size_t shared = std::min(before.blocks.size(), after.blocks.size());
  std::size_t common = 0;
  while (common < shared &&
         hash_block(before.blocks[common]) == hash_block(after.blocks[common])) {
    ++common;
  }
  return before.blocks.size() - common;
}

class Sim {
 public:
  Sim(const SimConfig& config, const Oracle& oracle, const LearningConfig& learning)
      : config_(config), oracle_(oracle), event_rng_(Rng::derive(config.seed, 0xE)) {
    validate_config(config);

    Chain genesis_chain;
    genesis_chain.blocks.push_back(make_genesis(oracle));
    nodes_.reserve(config.node_count);
    stats_.resize(config.node_count);
    for (std::uint32_t k = 0; k < config.node_count; ++k) {
      LearningConfig node_learning = learning;
      node_learning.seed = Rng::derive(config.seed, 0x100 + k);
      nodes_.push_back(make_node(k, oracle, node_learning, genesis_chain));
    }
  }

  SimReport run() {
    for (std::size_t i = 0; i < config_.partitions.size(); ++i) {
      Event e;
      e.time = config_.partitions[i].end;
      e.kind = EventKind::PartitionEnd;
      e.partition = i;
      push_event(std::move(e));
    }
    for (std::uint32_t k = 0; k < config_.node_count; ++k) {
      apply_outputs(k, handle_input(nodes_[k], StartMining{}, oracle_, config_.tie_break));
    }

    while (!queue_.empty()) {
      if (config_.stop_time && queue_.top().time > *config_.stop_time) {
        now_ = *config_.stop_time;
        break;
      }
      Event event = pop_event();
      now_ = event.time;
      process(std::move(event));
      if (tip_reached_limit_) break;
    }

    flush();
    return build_report();
  }

 private:
  double mine_mean(std::uint32_t node) const {
    return config_.mean_mine_time.size() == 1 ? config_.mean_mine_time[0]
                                              : config_.mean_mine_time[node];
  }

  bool same_side(const PartitionSpec& p, std::uint32_t a, std::uint32_t b) const {
    const auto in_a = [&](std::uint32_t id) {
      return std::find(p.side_a.begin(), p.side_a.end(), id) != p.side_a.end();
    };
    return in_a(a) == in_a(b);
  }

  bool blocked(std::uint32_t a, std::uint32_t b, double t) const {
    for (const PartitionSpec& p : config_.partitions) {
      if (t >= p.start && t < p.end && !same_side(p, a, b)) return true;
    }
    return false;
  }

  void push_event(Event e) {
    e.seq = next_seq_++;
    queue_.push(std::move(e));
  }

  Event pop_event() {
    Event e = queue_.top();
    queue_.pop();
    return e;
  }

  // Announce/RequestMining emitted by a node's state machine turn into
  // scheduled events. During the flush, mining requests are discarded: the
  // clock has stopped and only in-flight chains still move.
  void apply_outputs(std::uint32_t node, std::vector<NodeOutput> outputs, bool allow_mining = true) {
    for (NodeOutput& output : outputs) {
      if (auto* announce = std::get_if<Announce>(&output)) {
        for (std::uint32_t peer = 0; peer < config_.node_count; ++peer) {
          if (peer == node) continue;
          const double delay = event_rng_.exponential(config_.mean_link_delay);
          const double u = event_rng_.uniform01();
          if (u < config_.drop_probability) continue;
          if (blocked(node, peer, now_) || blocked(node, peer, now_ + delay)) continue;
          Event e;
          e.time = now_ + delay;
          e.kind = EventKind::Deliver;
          e.node = peer;
          e.from = node;
          e.chain = announce->chain;
          e.tip = announce->tip;
          push_event(std::move(e));
        }
      } else if (std::get_if<RequestMining>(&output)) {
        if (!allow_mining) continue;
        NodeHandle& handle = nodes_[node];
        handle.pending = PendingJob{tip_digest(handle.chain), handle.next_job_seq++};
        Event e;
        e.time = now_ + event_rng_.exponential(mine_mean(node));
        e.kind = EventKind::MineComplete;
        e.node = node;
        e.job_seq = handle.pending->job_seq;
        push_event(std::move(e));
      }
      // Ignore outputs carry no scheduling consequences.
    }
  }

  void process(Event event) {
    switch (event.kind) {
      case EventKind::MineComplete: on_mine_complete(event); break;
      case EventKind::Deliver: on_deliver(std::move(event), true); break;
      case EventKind::PartitionEnd: on_partition_end(event.partition); break;
    }
  }

  void on_mine_complete(const Event& event) {
    NodeHandle& node = nodes_[event.node];
    if (!node.pending || node.pending->job_seq != event.job_seq) return;  // aborted by a reorg
    node.pending.reset();

    Block block = mine_one_block(node.agent, oracle_, node.chain.tip(), config_.payload,
                                 event.node);
    NodeStats& stats = stats_[event.node];
    ++stats.mined;
    stats.mined_rewards.push_back(block.reward);
    stats.window_sum += block.reward;
    if (stats.mined_rewards.size() > kRewardWindow) {
      stats.window_sum -= stats.mined_rewards[stats.mined_rewards.size() - kRewardWindow - 1];
    }

    MetricRow row;
    row.time = now_;
    row.node = event.node;
    row.kind = "mine";
    row.height = block.height;
    row.value = block.reward;
    row.moving_avg =
        stats.window_sum / static_cast<double>(std::min(stats.mined_rewards.size(), kRewardWindow));
    metrics_.push_back(std::move(row));

    if (block.height >= config_.max_blocks) tip_reached_limit_ = true;
    apply_outputs(event.node, handle_input(node, MiningFinished{std::move(block)}, oracle_,
                                           config_.tie_break));
  }

  void on_deliver(Event event, bool allow_mining) {
    NodeHandle& node = nodes_[event.node];
    NodeStats& stats = stats_[event.node];
    ++stats.announcements_received;

    const Chain before = node.chain;
    std::vector<NodeOutput> outputs =
        handle_input(node, ChainAnnounced{std::move(event.chain), event.tip, event.from}, oracle_,
                     config_.tie_break);
    const bool adopted = std::any_of(outputs.begin(), outputs.end(), [](const NodeOutput& o) {
      return std::holds_alternative<RequestMining>(o);
    });
    if (adopted) {
      ++stats.adoptions;
      const std::uint64_t depth = reorg_depth(before, node.chain);
      ++stats.reorg_depth_histogram[depth];
      if (depth > 0) {
        ++stats.fork_events;
        last_reorg_time_ = now_;
      }
      MetricRow row;
      row.time = now_;
      row.node = event.node;
      row.kind = "adopt";
      row.height = node.chain.tip().height;
      row.value = static_cast<double>(depth);
      metrics_.push_back(std::move(row));
    } else if (log::enabled(log::Level::Debug)) {
      log::debug("node " + std::to_string(event.node) + " ignored announcement from " +
                 std::to_string(event.from));
    }
    apply_outputs(event.node, std::move(outputs), allow_mining);
  }

  // Snapshot each side's fork-choice winner the moment the partition heals;
  // the flush later checks the whole network against the predicted winner.
  void on_partition_end(std::size_t index) {
    const PartitionSpec& spec = config_.partitions[index];
    const auto best_of = [&](const std::vector<std::uint32_t>& members) -> const Chain* {
      const Chain* best = nullptr;
      for (std::uint32_t id : members) {
        if (!best || fork_choice(*best, nodes_[id].chain, config_.tie_break, oracle_) ==
                         ForkChoice::AdoptCandidate) {
          best = &nodes_[id].chain;
        }
      }
      return best;
    };

    std::vector<std::uint32_t> side_a;
    std::vector<std::uint32_t> side_b;
    for (std::uint32_t id = 0; id < config_.node_count; ++id) {
      const bool in_a =
          std::find(spec.side_a.begin(), spec.side_a.end(), id) != spec.side_a.end();
      (in_a ? side_a : side_b).push_back(id);
    }

    PartitionReport report;
    report.start = spec.start;
    report.end = spec.end;
    const Chain* best_a = best_of(side_a);
    const Chain* best_b = best_of(side_b);
    if (best_a) report.tip_a = tip_digest(*best_a);
    if (best_b) report.tip_b = tip_digest(*best_b);
    if (best_a && best_b) {
      report.predicted_winner =
          fork_choice(*best_a, *best_b, config_.tie_break, oracle_) == ForkChoice::AdoptCandidate
              ? report.tip_b
              : report.tip_a;
    } else if (best_a || best_b) {
      report.predicted_winner = best_a ? report.tip_a : report.tip_b;
    }
    partition_reports_.push_back(report);
  }

  // Quiescence: land every in-flight announcement, then run one lossless
  // all-to-all round. Fork choice is a total order, so one round from the
  // chains present at that moment leaves every node on the global winner.
  void flush() {
    while (!queue_.empty()) {
      Event event = pop_event();
      if (event.kind != EventKind::Deliver) continue;
      now_ = std::max(now_, event.time);
      on_deliver(std::move(event), false);
    }

    if (config_.node_count > 1) {
      std::vector<Chain> snapshots;
      snapshots.reserve(nodes_.size());
      for (const NodeHandle& node : nodes_) snapshots.push_back(node.chain);
      const double flush_start = now_;
      for (std::uint32_t k = 0; k < config_.node_count; ++k) {
        for (std::uint32_t peer = 0; peer < config_.node_count; ++peer) {
          if (peer == k) continue;
          Event e;
          e.time = flush_start + event_rng_.exponential(config_.mean_link_delay);
          e.kind = EventKind::Deliver;
          e.node = peer;
          e.from = k;
          e.chain = snapshots[k];
          e.tip = tip_digest(snapshots[k]);
          push_event(std::move(e));
        }
      }
      while (!queue_.empty()) {
        Event event = pop_event();
        now_ = std::max(now_, event.time);
        on_deliver(std::move(event), false);
      }
    }
  }

  SimReport build_report() {
    SimReport report;
    report.node_count = config_.node_count;
    report.seed = config_.seed;
    report.tie_break = config_.tie_break;
    report.end_time = now_;
    report.tip = tip_digest(nodes_[0].chain);
    report.converged = true;
    for (const NodeHandle& node : nodes_) {
      if (tip_digest(node.chain) != report.tip) report.converged = false;
    }

    for (std::uint32_t k = 0; k < config_.node_count; ++k) {
      const Chain& chain = nodes_[k].chain;
      NodeReport nr;
      nr.id = k;
      nr.final_height = chain.tip().height;
      nr.tip = tip_digest(chain);
      nr.mined = stats_[k].mined;
      nr.announcements_received = stats_[k].announcements_received;
      nr.adoptions = stats_[k].adoptions;
      nr.fork_events = stats_[k].fork_events;
      nr.reorg_depth_histogram = stats_[k].reorg_depth_histogram;

      for (std::size_t i = 1; i < chain.blocks.size(); ++i) {
        if (oracle_.is_terminal_state(chain.blocks[i].state)) {
          ++nr.goal_episodes;
          if (!nr.blocks_to_first_goal) nr.blocks_to_first_goal = chain.blocks[i].height;
        }
      }
      const std::size_t produced = chain.blocks.size() - 1;
      if (produced > 0) {
        const std::size_t span = std::min(produced, kRewardWindow);
        double first_sum = 0.0;
        double last_sum = 0.0;
        for (std::size_t i = 0; i < span; ++i) {
          first_sum += chain.blocks[1 + i].reward;
          last_sum += chain.blocks[chain.blocks.size() - span + i].reward;
        }
        nr.first200_avg_reward = first_sum / static_cast<double>(span);
        nr.last200_avg_reward = last_sum / static_cast<double>(span);
      }
      report.nodes.push_back(std::move(nr));
    }

    for (PartitionReport& pr : partition_reports_) {
      pr.convergence_time_after_heal =
          last_reorg_time_ > pr.end ? last_reorg_time_ - pr.end : 0.0;
      report.partitions.push_back(pr);
    }
    report.metrics = std::move(metrics_);
    for (NodeHandle& node : nodes_) {
      report.final_chains.push_back(std::move(node.chain));
      report.final_params.push_back(std::move(node.agent.prediction));
    }
    return report;
  }

  const SimConfig& config_;
  const Oracle& oracle_;
  Rng event_rng_;
  std::vector<NodeHandle> nodes_;
  std::vector<NodeStats> stats_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
  bool tip_reached_limit_ = false;
  double last_reorg_time_ = 0.0;
  std::vector<MetricRow> metrics_;
  std::vector<PartitionReport> partition_reports_;
};

}  // namespace

SimReport run_simulation(const SimConfig& config, const Oracle& oracle,
                         const LearningConfig& learning) {
  Sim sim(config, oracle, learning);
  return sim.run();
}

AttackReport run_attack_scenario(const SimConfig& config, const Oracle& oracle,
                                 const LearningConfig& learning, std::uint32_t honest_count,
                                 std::uint32_t attacker_count, std::uint64_t tamper_height,
                                 std::uint32_t case_count) {
  if (honest_count == 0 || attacker_count == 0 || case_count == 0) {
    throw std::invalid_argument("attack scenario needs honest, attacker, and case counts >= 1");
  }
  if (tamper_height == 0 || tamper_height > config.max_blocks) {
    throw std::invalid_argument("tamper_height must lie in [1, max_blocks]");
  }

  AttackReport report;
  report.honest_count = honest_count;
  report.attacker_count = attacker_count;
  report.tamper_height = tamper_height;
  report.cases_run = case_count;

  std::uint32_t survived_last = 0;
  std::uint32_t survived_sum = 0;
  for (std::uint32_t i = 0; i < case_count; ++i) {
    const std::uint64_t case_seed = Rng::derive(config.seed, 0xA000 + i);
    SimConfig honest_config = config;
    honest_config.node_count = honest_count;
    honest_config.seed = case_seed;
    honest_config.partitions.clear();
    const SimReport honest_run = run_simulation(honest_config, oracle, learning);
    const Chain& honest = honest_run.final_chains[0];

    // Fork at tamper_height by rewriting that block's payload. The recorded
    // transition is untouched (a forged one would fail validation), so only
    // the digest changes and every later block must be remined.
    Chain attacker;
    attacker.blocks.assign(honest.blocks.begin(),
                           honest.blocks.begin() + static_cast<std::ptrdiff_t>(tamper_height) + 1);
    Block& tampered = attacker.blocks.back();
    tampered.payload.assign({'r', 'e', 'w', 'r', 'i', 't', 'e'});
    if (tampered.payload == honest.blocks[tamper_height].payload) tampered.payload.push_back(0);
    tampered.author = honest_count;  // first attacker id

    std::vector<AgentState> attackers;
    attackers.reserve(attacker_count);
    for (std::uint32_t k = 0; k < attacker_count; ++k) {
      LearningConfig attacker_learning = learning;
      attacker_learning.seed = Rng::derive(case_seed, 0xB00 + k);
      attackers.push_back(make_agent(oracle, attacker_learning));
      rebuild_replay_from_chain(attackers.back(), attacker, oracle);
    }
    for (std::uint64_t step = 0; attacker.length() < honest.length(); ++step) {
      const std::uint32_t k = static_cast<std::uint32_t>(step % attacker_count);
      Block block = mine_one_block(attackers[k], oracle, attacker.tip(), config.payload,
                                   honest_count + k);
      if (append_block(attacker, std::move(block), oracle)) {
        throw std::logic_error("attacker remine produced an unappendable block");
      }
    }

    AttackCase c;
    c.seed = case_seed;
    c.chain_length = honest.length();
    c.honest_tip_reward = honest.tip().reward;
    c.attacker_tip_reward = attacker.tip().reward;
    c.honest_reward_sum = chain_reward_sum(honest);
    c.attacker_reward_sum = chain_reward_sum(attacker);
    c.survived_last_reward =
        fork_choice(honest, attacker, TieBreakRule::LastReward, oracle) == ForkChoice::KeepLocal;
    c.survived_sum_reward =
        fork_choice(honest, attacker, TieBreakRule::SumReward, oracle) == ForkChoice::KeepLocal;
    survived_last += c.survived_last_reward ? 1 : 0;
    survived_sum += c.survived_sum_reward ? 1 : 0;

    if (i == 0) {
      report.honest_example = honest;
      report.attacker_example = attacker;
    }
    report.cases.push_back(std::move(c));
  }

  report.survival_fraction_last_reward =
      static_cast<double>(survived_last) / static_cast<double>(case_count);
  report.survival_fraction_sum_reward =
      static_cast<double>(survived_sum) / static_cast<double>(case_count);
  return report;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = "time,node,kind,height,value,moving_avg\n";
  for (const MetricRow& row : rows) {
    out += format_double(row.time);
    out += ',';
    out += std::to_string(row.node);
    out += ',';
    out += row.kind;
    out += ',';
    out += std::to_string(row.height);
    out += ',';
    out += format_double(row.value);
    out += ',';
    if (row.moving_avg) out += format_double(*row.moving_avg);
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json node_report_json(const NodeReport& nr) {
  nlohmann::json j;
  j["id"] = nr.id;
  j["final_height"] = nr.final_height;
  j["tip"] = to_hex(nr.tip);
  j["mined"] = nr.mined;
  j["announcements_received"] = nr.announcements_received;
  j["adoptions"] = nr.adoptions;
  j["fork_events"] = nr.fork_events;
  nlohmann::json histogram = nlohmann::json::object();
  for (const auto& [depth, count] : nr.reorg_depth_histogram) {
    histogram[std::to_string(depth)] = count;
  }
  j["reorg_depth_histogram"] = std::move(histogram);
  j["blocks_to_first_goal"] =
      nr.blocks_to_first_goal ? nlohmann::json(*nr.blocks_to_first_goal) : nlohmann::json();
  j["goal_episodes"] = nr.goal_episodes;
  j["first200_avg_reward"] =
      nr.first200_avg_reward ? nlohmann::json(*nr.first200_avg_reward) : nlohmann::json();
  j["last200_avg_reward"] =
      nr.last200_avg_reward ? nlohmann::json(*nr.last200_avg_reward) : nlohmann::json();
  return j;
}

}  // namespace

std::string report_json(const SimReport& report, const std::string& scenario) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["scenario"] = scenario;
  j["node_count"] = report.node_count;
  j["seed"] = report.seed;
  j["tie_break"] = to_string(report.tie_break);
  j["end_time"] = report.end_time;
  j["converged"] = report.converged;
  j["tip"] = to_hex(report.tip);
  j["nodes"] = nlohmann::json::array();
  for (const NodeReport& nr : report.nodes) j["nodes"].push_back(node_report_json(nr));
  j["partitions"] = nlohmann::json::array();
  for (const PartitionReport& pr : report.partitions) {
    nlohmann::json p;
    p["start"] = pr.start;
    p["end"] = pr.end;
    p["tip_a"] = to_hex(pr.tip_a);
    p["tip_b"] = to_hex(pr.tip_b);
    p["predicted_winner"] = to_hex(pr.predicted_winner);
    p["convergence_time_after_heal"] = pr.convergence_time_after_heal;
    j["partitions"].push_back(std::move(p));
  }
  return j.dump(2) + "\n";
}

std::string attack_report_json(const AttackReport& report, const SimConfig& config) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["scenario"] = "attack";
  j["seed"] = config.seed;
  j["max_blocks"] = config.max_blocks;
  j["honest_count"] = report.honest_count;
  j["attacker_count"] = report.attacker_count;
  j["tamper_height"] = report.tamper_height;
  j["cases_run"] = report.cases_run;
  j["survival_fraction_last_reward"] = report.survival_fraction_last_reward;
  j["survival_fraction_sum_reward"] = report.survival_fraction_sum_reward;
  j["cases"] = nlohmann::json::array();
  for (const AttackCase& c : report.cases) {
    nlohmann::json cj;
    cj["seed"] = c.seed;
    cj["chain_length"] = c.chain_length;
    cj["honest_tip_reward"] = c.honest_tip_reward;
    cj["attacker_tip_reward"] = c.attacker_tip_reward;
    cj["honest_reward_sum"] = c.honest_reward_sum;
    cj["attacker_reward_sum"] = c.attacker_reward_sum;
    cj["survived_last_reward"] = c.survived_last_reward;
    cj["survived_sum_reward"] = c.survived_sum_reward;
    j["cases"].push_back(std::move(cj));
  }
  return j.dump(2) + "\n";
}

}  // namespace pourl
