#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "config.hpp"
#include "pourl/chain_io.hpp"
#include "pourl/consensus.hpp"
#include "pourl/log.hpp"
#include "pourl/netsim.hpp"
#include "pourl/sha256.hpp"

namespace pourl::cli {
namespace {

namespace fs = std::filesystem;

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void run_sim_scenario(const ExperimentConfig& config, const GridWorld& grid) {
  const SimReport report = run_simulation(config.sim, grid, config.learning);

  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir / "chains");
  fs::create_directories(out_dir / "params");
  write_text_file(out_dir / "metrics.csv", metrics_csv(report.metrics));
  write_text_file(out_dir / "report.json", report_json(report, config.scenario));
  write_text_file(out_dir / "awards.csv", awards_csv(compute_awards(report.final_chains[0])));
  for (std::size_t i = 0; i < report.final_chains.size(); ++i) {
    const std::string name = "node_" + std::to_string(i);
    if (!write_chain_file((out_dir / "chains" / (name + ".chain")).string(),
                          report.final_chains[i], grid)) {
      throw std::runtime_error("cannot write chain dump for node " + std::to_string(i));
    }
    if (!save_params_file((out_dir / "params" / (name + ".qnet")).string(),
                          report.final_params[i])) {
      throw std::runtime_error("cannot write parameter snapshot for node " + std::to_string(i));
    }
  }
  std::fprintf(stdout, "%s: %u node(s), tip height %llu, converged=%s, outputs in %s\n",
               config.scenario.c_str(), report.node_count,
               static_cast<unsigned long long>(report.nodes[0].final_height),
               report.converged ? "true" : "false", config.out_dir.c_str());
}

void run_attack(const ExperimentConfig& config, const GridWorld& grid) {
  const AttackReport report =
      run_attack_scenario(config.sim, grid, config.learning, config.honest_count,
                          config.attacker_count, config.tamper_height, config.attack_cases);

  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir / "chains");
  write_text_file(out_dir / "report.json", attack_report_json(report, config.sim));
  if (!write_chain_file((out_dir / "chains" / "honest.chain").string(), report.honest_example,
                        grid) ||
      !write_chain_file((out_dir / "chains" / "attacker.chain").string(),
                        report.attacker_example, grid)) {
    throw std::runtime_error("cannot write example chain dumps");
  }
  std::fprintf(stdout,
               "attack: %u cases, honest survival %.3f (last_reward) / %.3f (sum_reward), "
               "outputs in %s\n",
               report.cases_run, report.survival_fraction_last_reward,
               report.survival_fraction_sum_reward, config.out_dir.c_str());
}

}  // namespace

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_override,
            std::optional<std::uint64_t> seed_override) {
  ExperimentConfig config;
  try {
    config = load_experiment_config(config_path);
    if (out_override) config.out_dir = *out_override;
    if (seed_override) config.sim.seed = *seed_override;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    const GridWorld grid(config.grid);
    if (config.scenario == "attack") {
      run_attack(config, grid);
    } else {
      run_sim_scenario(config, grid);
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    // Parameter validation inside the library: still the config's fault.
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int cmd_verify(const std::string& chain_path) {
  const auto loaded = load_chain_file(chain_path);
  if (const auto* error = std::get_if<ChainLoadError>(&loaded)) {
    std::fprintf(stderr, "error: %s: %s\n", chain_path.c_str(),
                 *error == ChainLoadError::Unreadable ? "cannot read file"
                                                      : "not a readable chain dump");
    return 2;
  }
  const LoadedChain& dump = std::get<LoadedChain>(loaded);

  try {
    const GridWorld grid(dump.grid);
    const auto failure = validate_chain(dump.chain, grid);
    if (!failure) {
      std::fprintf(stdout, "OK blocks=%zu tip=%s\n", dump.chain.blocks.size(),
                   to_hex(tip_digest(dump.chain)).c_str());
      return 0;
    }
    std::fprintf(stdout, "INVALID height=%llu cause=%s\n",
                 static_cast<unsigned long long>(failure->height),
                 to_string(failure->error).c_str());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s: bad oracle header: %s\n", chain_path.c_str(), e.what());
    return 2;
  }
}

int cmd_inspect(const std::string& chain_path, bool as_json) {
  const auto loaded = load_chain_file(chain_path);
  if (const auto* error = std::get_if<ChainLoadError>(&loaded)) {
    std::fprintf(stderr, "error: %s: %s\n", chain_path.c_str(),
                 *error == ChainLoadError::Unreadable ? "cannot read file"
                                                      : "not a readable chain dump");
    return 2;
  }
  const Chain& chain = std::get<LoadedChain>(loaded).chain;

  if (as_json) {
    std::fputs(chain_json_lines(chain).c_str(), stdout);
    return 0;
  }
  for (const Block& block : chain.blocks) {
    std::string action = block.action == kNoAction ? "-" : std::to_string(block.action);
    std::string author = block.author == kNoAuthor ? "-" : std::to_string(block.author);
    std::fprintf(stdout, "height=%llu author=%s action=%s reward=%g hash=%s\n",
                 static_cast<unsigned long long>(block.height), author.c_str(), action.c_str(),
                 block.reward, to_hex(hash_block(block)).c_str());
  }
  return 0;
}

}  // namespace pourl::cli
