#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "pourl/consensus.hpp"
#include "pourl/environment.hpp"
#include "pourl/hashchain.hpp"
#include "pourl/netsim.hpp"
#include "pourl/sha256.hpp"

using pourl::AttackReport;
using pourl::GridWorld;
using pourl::GridWorldConfig;
using pourl::LearningConfig;
using pourl::MetricRow;
using pourl::PartitionSpec;
using pourl::run_attack_scenario;
using pourl::run_simulation;
using pourl::SimConfig;
using pourl::SimReport;
using pourl::TieBreakRule;

namespace {

LearningConfig small_learning() {
  LearningConfig learning;
  learning.batch_size = 4;
  learning.hidden_sizes = {8};
  return learning;
}

// invariants that must hold for every simulation report
void check_report_consistency(const SimReport& report, const GridWorld& world) {
  REQUIRE(report.nodes.size() == report.node_count);
  REQUIRE(report.final_chains.size() == report.node_count);
  REQUIRE(report.final_params.size() == report.node_count);

  for (std::uint32_t k = 0; k < report.node_count; ++k) {
    const pourl::NodeReport& nr = report.nodes[k];
    const pourl::Chain& chain = report.final_chains[k];
    CAPTURE(k);
    CHECK(nr.id == k);
    CHECK(!pourl::validate_chain(chain, world).has_value());
    CHECK(nr.final_height == chain.tip().height);
    CHECK(nr.tip == pourl::tip_digest(chain));
    CHECK(report.final_params[k].input_dim() == 2);
    CHECK(report.final_params[k].output_dim() == 4);

    // histogram counts every adoption; fork events are the depth > 0 slice
    std::uint64_t histogram_total = 0;
    std::uint64_t zero_depth = 0;
    for (const auto& [depth, count] : nr.reorg_depth_histogram) {
      histogram_total += count;
      if (depth == 0) zero_depth = count;
    }
    CHECK(histogram_total == nr.adoptions);
    CHECK(nr.fork_events == nr.adoptions - zero_depth);

    // metric rows must agree with the per-node counters
    std::uint64_t mine_rows = 0;
    std::uint64_t adopt_rows = 0;
    std::uint64_t deep_adopts = 0;
    double window_sum = 0.0;
    std::uint64_t window_count = 0;
    for (const MetricRow& row : report.metrics) {
      if (row.node != k) continue;
      if (row.kind == "mine") {
        ++mine_rows;
        REQUIRE(row.moving_avg.has_value());
        if (window_count < 200) {  // these runs never fill the window
          window_sum += row.value;
          ++window_count;
          CHECK(*row.moving_avg ==
                doctest::Approx(window_sum / static_cast<double>(window_count)).epsilon(1e-12));
        }
      } else {
        REQUIRE(row.kind == "adopt");
        ++adopt_rows;
        CHECK(!row.moving_avg.has_value());
        if (row.value > 0.0) ++deep_adopts;
      }
    }
    CHECK(mine_rows == nr.mined);
    CHECK(adopt_rows == nr.adoptions);
    CHECK(deep_adopts == nr.fork_events);

    // learning-progress summaries recomputed from the final chain
    std::uint64_t goals = 0;
    std::optional<std::uint64_t> first_goal;
    for (std::size_t i = 1; i < chain.blocks.size(); ++i) {
      if (world.is_terminal_state(chain.blocks[i].state)) {
        ++goals;
        if (!first_goal) first_goal = chain.blocks[i].height;
      }
    }
    CHECK(nr.goal_episodes == goals);
    CHECK(nr.blocks_to_first_goal == first_goal);
  }

  if (report.converged) {
    for (const pourl::NodeReport& nr : report.nodes) CHECK(nr.tip == report.tip);
  }
  // metric rows arrive in event order
  for (std::size_t i = 1; i < report.metrics.size(); ++i) {
    CHECK(report.metrics[i - 1].time <= report.metrics[i].time);
  }
}

}  // namespace

TEST_CASE("simulation configs are validated") {
  const GridWorld world{GridWorldConfig{}};
  const LearningConfig learning = small_learning();
  auto bad = [&](auto mutate) {
    SimConfig config;
    config.node_count = 3;
    mutate(config);
    CHECK_THROWS_AS((void)run_simulation(config, world, learning), std::invalid_argument);
  };
  bad([](SimConfig& c) { c.node_count = 0; });
  bad([](SimConfig& c) { c.mean_mine_time = {1.0, 1.0}; });       // neither 1 nor node_count
  bad([](SimConfig& c) { c.mean_mine_time = {0.0}; });
  bad([](SimConfig& c) { c.mean_mine_time = {1.0, -2.0, 1.0}; });
  bad([](SimConfig& c) { c.mean_link_delay = 0.0; });
  bad([](SimConfig& c) { c.drop_probability = 1.0; });
  bad([](SimConfig& c) { c.drop_probability = -0.1; });
  bad([](SimConfig& c) { c.max_blocks = 0; });
  bad([](SimConfig& c) { c.stop_time = 0.0; });
  bad([](SimConfig& c) { c.payload.assign(pourl::kMaxPayloadBytes + 1, 0); });
  bad([](SimConfig& c) { c.partitions = {{5.0, 2.0, {0}}}; });    // end before start
  bad([](SimConfig& c) { c.partitions = {{1.0, 2.0, {7}}}; });    // unknown node
  bad([](SimConfig& c) { c.partitions = {{1.0, 4.0, {0}}, {3.0, 6.0, {1}}}; });  // overlap

  SimConfig config;
  config.node_count = 2;
  config.max_blocks = 10;
  CHECK_THROWS_AS((void)run_attack_scenario(config, world, learning, 0, 3, 3, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)run_attack_scenario(config, world, learning, 2, 0, 3, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)run_attack_scenario(config, world, learning, 2, 3, 3, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)run_attack_scenario(config, world, learning, 2, 3, 0, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)run_attack_scenario(config, world, learning, 2, 3, 11, 2),
                  std::invalid_argument);
}

TEST_CASE("metrics_csv renders rows exactly") {
  const std::vector<MetricRow> rows = {
      {0.5, 1, "mine", 3, -0.04, 0.25},
      {1.25, 0, "adopt", 4, 2.0, std::nullopt},
  };
  CHECK(pourl::metrics_csv(rows) ==
        "time,node,kind,height,value,moving_avg\n"
        "0.5,1,mine,3,-0.04,0.25\n"
        "1.25,0,adopt,4,2,\n");
  CHECK(pourl::metrics_csv({}) == "time,node,kind,height,value,moving_avg\n");
}

TEST_CASE("a single node mines to the block limit") {
  const GridWorld world{GridWorldConfig{}};
  SimConfig config;
  config.node_count = 1;
  config.seed = 5;
  config.max_blocks = 30;

  const SimReport report = run_simulation(config, world, small_learning());
  CHECK(report.node_count == 1);
  CHECK(report.seed == 5);
  CHECK(report.converged);
  CHECK(report.end_time > 0.0);
  CHECK(report.nodes[0].mined == 30);
  CHECK(report.nodes[0].final_height == 30);
  CHECK(report.nodes[0].announcements_received == 0);
  CHECK(report.nodes[0].adoptions == 0);
  CHECK(report.nodes[0].fork_events == 0);
  CHECK(report.final_chains[0].length() == 31);
  check_report_consistency(report, world);

  // mine rows walk the heights in order
  std::uint64_t next_height = 1;
  for (const MetricRow& row : report.metrics) {
    REQUIRE(row.kind == "mine");
    CHECK(row.height == next_height++);
  }
}

TEST_CASE("stop_time ends a quiet simulation exactly on time") {
  const GridWorld world{GridWorldConfig{}};
  SimConfig config;
  config.node_count = 1;
  config.seed = 2;
  config.max_blocks = 100000;
  config.stop_time = 5.0;

  const SimReport report = run_simulation(config, world, small_learning());
  CHECK(report.end_time == 5.0);  // one node: nothing to flush afterwards
  CHECK(report.nodes[0].mined > 0);
  CHECK(report.nodes[0].mined < 100);
  check_report_consistency(report, world);
}

TEST_CASE("identical configs give byte-identical outputs") {
  const GridWorld world{GridWorldConfig{}};
  SimConfig config;
  config.node_count = 3;
  config.seed = 11;
  config.max_blocks = 40;
  config.drop_probability = 0.1;

  const SimReport a = run_simulation(config, world, small_learning());
  const SimReport b = run_simulation(config, world, small_learning());
  CHECK(pourl::metrics_csv(a.metrics) == pourl::metrics_csv(b.metrics));
  CHECK(pourl::report_json(a, "converge") == pourl::report_json(b, "converge"));
  CHECK(a.tip == b.tip);
  REQUIRE(a.final_chains.size() == b.final_chains.size());
  for (std::size_t k = 0; k < a.final_chains.size(); ++k) {
    CHECK(pourl::tip_digest(a.final_chains[k]) == pourl::tip_digest(b.final_chains[k]));
  }

  config.seed = 12;  // and the seed genuinely matters
  const SimReport c = run_simulation(config, world, small_learning());
  CHECK(pourl::metrics_csv(a.metrics) != pourl::metrics_csv(c.metrics));
}

TEST_CASE("five nodes converge on one chain") {
  const GridWorld world{GridWorldConfig{}};
  SimConfig config;
  config.node_count = 5;
  config.seed = 7;
  config.max_blocks = 60;

  const SimReport report = run_simulation(config, world, small_learning());
  CHECK(report.converged);
  CHECK(report.nodes[0].final_height >= 60);
  std::uint64_t total_adoptions = 0;
  std::uint64_t total_mined = 0;
  for (const auto& nr : report.nodes) {
    total_adoptions += nr.adoptions;
    total_mined += nr.mined;
  }
  CHECK(total_adoptions > 0);   // gossip actually happened
  CHECK(total_mined >= 60);     // the winning chain is a subset of all mining
  check_report_consistency(report, world);
}

TEST_CASE("convergence survives a lossy network") {
  const GridWorld world{GridWorldConfig{}};
  SimConfig config;
  config.node_count = 4;
  config.seed = 19;
  config.max_blocks = 50;
  config.drop_probability = 0.2;

  const SimReport report = run_simulation(config, world, small_learning());
  CHECK(report.converged);
  check_report_consistency(report, world);
}

TEST_CASE("a partition forks the network and healing reunites it") {
  const GridWorld world{GridWorldConfig{}};
  SimConfig config;
  config.node_count = 4;
  config.seed = 7;
  config.max_blocks = 40;
  config.partitions = {{3.0, 9.0, {0, 1}}};

  const SimReport report = run_simulation(config, world, small_learning());
  REQUIRE(report.partitions.size() == 1);
  const pourl::PartitionReport& pr = report.partitions[0];
  CHECK(pr.start == 3.0);
  CHECK(pr.end == 9.0);
  const bool winner_is_a = pr.predicted_winner == pr.tip_a;
  const bool winner_is_b = pr.predicted_winner == pr.tip_b;
  CHECK((winner_is_a || winner_is_b));
  CHECK(pr.convergence_time_after_heal >= 0.0);
  CHECK(report.converged);
  check_report_consistency(report, world);
}

TEST_CASE("stopping at the heal leaves exactly the predicted winner") {
  const GridWorld world{GridWorldConfig{}};
  for (const TieBreakRule rule : {TieBreakRule::LastReward, TieBreakRule::SumReward}) {
    SimConfig config;
    config.node_count = 4;
    config.seed = 21;
    config.max_blocks = 100000;  // stop_time is the binding limit
    config.stop_time = 8.0;
    config.partitions = {{2.0, 8.0, {0, 1}}};
    config.tie_break = rule;

    const SimReport report = run_simulation(config, world, small_learning());
    REQUIRE(report.partitions.size() == 1);
    CAPTURE(pourl::to_string(rule));
    CHECK(report.converged);
    // the flush may not deliver anything newer than the heal-time snapshots,
    // so the common tip must be the fork-choice winner of the two sides
    CHECK(report.tip == report.partitions[0].predicted_winner);
    check_report_consistency(report, world);
  }
}

TEST_CASE("report_json carries the full structure") {
  const GridWorld world{GridWorldConfig{}};
  SimConfig config;
  config.node_count = 2;
  config.seed = 3;
  config.max_blocks = 15;

  const SimReport report = run_simulation(config, world, small_learning());
  const std::string text = pourl::report_json(report, "converge");
  REQUIRE(!text.empty());
  CHECK(text.back() == '\n');

  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("scenario") == "converge");
  CHECK(j.at("node_count") == 2);
  CHECK(j.at("seed") == 3);
  CHECK(j.at("tie_break") == "last_reward");
  CHECK(j.at("converged").is_boolean());
  CHECK(j.at("tip") == pourl::to_hex(report.tip));
  REQUIRE(j.at("nodes").size() == 2);
  CHECK(j.at("nodes")[0].at("mined") == report.nodes[0].mined);
  CHECK(j.at("nodes")[1].at("id") == 1);
  CHECK(j.at("partitions").is_array());
  CHECK(j.at("partitions").empty());
}

TEST_CASE("the attack scenario remines a tampered fork to equal length") {
  const GridWorld world{GridWorldConfig{}};
  SimConfig config;
  config.node_count = 2;  // overridden by honest_count inside
  config.seed = 1;
  config.max_blocks = 10;

  const AttackReport report = run_attack_scenario(config, world, small_learning(), 2, 3, 3, 4);
  CHECK(report.honest_count == 2);
  CHECK(report.attacker_count == 3);
  CHECK(report.tamper_height == 3);
  CHECK(report.cases_run == 4);
  REQUIRE(report.cases.size() == 4);

  const pourl::Chain& honest = report.honest_example;
  const pourl::Chain& attacker = report.attacker_example;
  REQUIRE(honest.length() == attacker.length());
  CHECK(honest.length() == report.cases[0].chain_length);

  // both chains validate: the tampered fork forges nothing about the MDP
  CHECK(!pourl::validate_chain(honest, world).has_value());
  CHECK(!pourl::validate_chain(attacker, world).has_value());

  // identical up to the tampered block, divergent from it onward
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(pourl::hash_block(honest.blocks[i]) == pourl::hash_block(attacker.blocks[i]));
  }
  CHECK(pourl::hash_block(honest.blocks[3]) != pourl::hash_block(attacker.blocks[3]));
  CHECK(attacker.blocks[3].payload != honest.blocks[3].payload);
  CHECK(attacker.blocks[3].state == honest.blocks[3].state);
  CHECK(attacker.blocks[3].action == honest.blocks[3].action);
  CHECK(attacker.blocks[3].reward == honest.blocks[3].reward);
  CHECK(attacker.blocks[3].author == 2);  // first attacker id

  // remined blocks carry attacker ids
  for (std::size_t i = 4; i < attacker.blocks.size(); ++i) {
    CHECK(attacker.blocks[i].author >= 2);
    CHECK(attacker.blocks[i].author < 5);
  }

  // per-case numbers match what fork choice actually sees
  const pourl::AttackCase& c = report.cases[0];
  CHECK(c.honest_tip_reward == honest.tip().reward);
  CHECK(c.attacker_tip_reward == attacker.tip().reward);
  CHECK(c.honest_reward_sum == pourl::chain_reward_sum(honest));
  CHECK(c.attacker_reward_sum == pourl::chain_reward_sum(attacker));
  CHECK(c.survived_last_reward ==
        (pourl::fork_choice(honest, attacker, TieBreakRule::LastReward, world) ==
         pourl::ForkChoice::KeepLocal));
  CHECK(c.survived_sum_reward ==
        (pourl::fork_choice(honest, attacker, TieBreakRule::SumReward, world) ==
         pourl::ForkChoice::KeepLocal));

  // survival fractions are the case-level means
  double last = 0.0;
  double sum = 0.0;
  for (const auto& one : report.cases) {
    last += one.survived_last_reward ? 1.0 : 0.0;
    sum += one.survived_sum_reward ? 1.0 : 0.0;
  }
  CHECK(report.survival_fraction_last_reward == last / 4.0);
  CHECK(report.survival_fraction_sum_reward == sum / 4.0);

  // deterministic end to end
  const AttackReport again = run_attack_scenario(config, world, small_learning(), 2, 3, 3, 4);
  CHECK(pourl::attack_report_json(report, config) == pourl::attack_report_json(again, config));

  const auto j = nlohmann::json::parse(pourl::attack_report_json(report, config));
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("scenario") == "attack");
  CHECK(j.at("tamper_height") == 3);
  CHECK(j.at("cases").size() == 4);
}

TEST_CASE("mining long enough improves the recorded rewards for most seeds") {
  const GridWorld world{GridWorldConfig{}};
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig config;
    config.node_count = 1;
    config.seed = seed;
    config.max_blocks = 2000;
    const SimReport report = run_simulation(config, world, LearningConfig{});
    const pourl::NodeReport& nr = report.nodes[0];
    REQUIRE(nr.first200_avg_reward.has_value());
    REQUIRE(nr.last200_avg_reward.has_value());
    if (*nr.last200_avg_reward > *nr.first200_avg_reward) ++improved;
  }
  // measured on this exact setup: 7 of the 10 seeds improve
  CHECK(improved >= 6);
}

TEST_CASE("pooled experience reaches the first goal sooner for most seeds") {
  const GridWorld world{GridWorldConfig{}};
  const std::uint64_t miss = 401;  // worse than any height the runs can record
  int wins = 0;
  int ties = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig config;
    config.seed = seed;
    config.max_blocks = 400;

    config.node_count = 1;
    const SimReport solo = run_simulation(config, world, LearningConfig{});
    config.node_count = 5;
    const SimReport pooled = run_simulation(config, world, LearningConfig{});

    const std::uint64_t h1 = solo.nodes[0].blocks_to_first_goal.value_or(miss);
    const std::uint64_t h5 = pooled.nodes[0].blocks_to_first_goal.value_or(miss);
    if (h5 < h1) ++wins;
    if (h5 == h1) ++ties;
  }
  // measured on this exact setup; five cooperating miners find the goal
  // earlier in chain height for a solid majority of seeds
  CHECK(wins * 2 > 20 - ties);
}
