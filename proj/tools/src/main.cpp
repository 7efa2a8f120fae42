#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Blockchain miner where the proof of work is Q-learning; runs scenario "
               "experiments and checks chain dumps. Set POURL_LOG=debug for event traces."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string chain_path;
  bool as_json = false;

  CLI::App* run = app.add_subcommand("run", "execute the scenario named in a config file");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--seed", seed, "simulation seed (overrides the config)");

  CLI::App* verify = app.add_subcommand("verify", "re-validate a .chain dump");
  verify->add_option("chain", chain_path, "path to a .chain dump")->required();

  CLI::App* inspect = app.add_subcommand("inspect", "print the blocks of a .chain dump");
  inspect->add_option("chain", chain_path, "path to a .chain dump")->required();
  inspect->add_flag("--json", as_json, "one JSON object per block");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return pourl::cli::cmd_run(
        config_path, out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir), seed);
  }
  if (verify->parsed()) return pourl::cli::cmd_verify(chain_path);
  return pourl::cli::cmd_inspect(chain_path, as_json);
}
