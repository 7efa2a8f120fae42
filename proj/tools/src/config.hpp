#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "pourl/dqn.hpp"
#include "pourl/environment.hpp"
#include "pourl/netsim.hpp"

namespace pourl::cli {

// Anything wrong with the config file itself: unreadable, bad syntax, unknown
// or ill-typed keys, values out of range. Always maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string scenario;  // mine | converge | partition | attack | learncurve
  std::string out_dir = "out";
  SimConfig sim;
  LearningConfig learning;
  GridWorldConfig grid;
  // attack scenario only
  std::uint32_t honest_count = 4;
  std::uint32_t attacker_count = 6;
  std::uint64_t tamper_height = 10;
  std::uint32_t attack_cases = 100;
};

// Flat key-value file, one `key = value` per line, # comments, quoted
// strings, numbers, booleans, and [v, v, ...] number arrays. schema_version
// must be 1 and unknown keys are rejected. Throws ConfigError.
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace pourl::cli
