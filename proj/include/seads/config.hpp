#pragma once

// Run configuration: JSON schema, built-in profiles and ablation switches.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seads/planner.hpp"
#include "seads/training.hpp"

namespace seads {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct Ablations {
  bool no_relabel = false;
  bool no_sac_relabel = false;
  bool no_fm_relabel = false;
  bool no_second_best = false;
  bool no_novelty = false;
  bool vic_discriminator = false;
  bool more_skills = false;

  friend bool operator==(const Ablations&, const Ablations&) = default;
};

struct EvalConfig {
  int tasks_per_depth = 20;
  int count_states = 100;
  int max_depth = 5;
};

struct BaselineConfig {
  std::int64_t env_steps = 500000;
  int hidden = 512;
  int hidden_layers = 3;
  double alpha = 0.01;
  double learning_rate = 3e-4;
  int buffer = 1000000;
  int batch = 256;
  int samples_per_update = 8;
  int step_limit_factor = 10;  // step limit = factor * solution depth
  int log_every_episodes = 100;
};

struct RunConfig {
  std::string profile = "lightsout-cursor";
  std::string manipulator = "cursor";
  GameSpec game = GameSpec::lights_out();
  std::optional<int> num_skills;  // default: number of game moves (or the "more skills" count)
  std::optional<std::uint64_t> seed;
  std::string output_dir = "runs";
  int checkpoint_every = 100;  // epochs; 0 = final checkpoint only
  EnvConfig env;
  TrainConfig train;
  sac::SacConfig sac;
  bool second_best_norm = true;
  bool novelty_bonus = true;
  SkillModelConfig skill_model;
  Ablations ablations;
  planning::PlanLimits planner;
  EvalConfig eval;
  BaselineConfig baseline;

  /// K after applying defaults and the "more skills" switch.
  int skills() const;
  /// Training configuration with all ablation switches applied.
  SeadsConfig seads() const;
  /// Throws ConfigError.
  void validate() const;
};

std::vector<std::string> profile_names();
/// Built-in defaults for a profile ("fast", "lightsout-cursor", "tileswap-cursor").
RunConfig profile_config(std::string_view name);

/// Parses JSON text on top of its "profile" (or `base_profile`). Unknown
/// keys and wrong types are rejected with the field path. The seed is not
/// required here; see RunConfig::validate.
RunConfig parse_config(std::string_view json_text, std::string_view base_profile = "lightsout-cursor");
RunConfig load_config(const std::string& path, std::string_view base_profile = "lightsout-cursor");

/// Complete, canonical JSON of every field (parse_config(to_json(c)) == c).
std::string config_to_json(const RunConfig& config);

/// Number of moves of the game (the natural skill count).
int move_count(const GameSpec& spec);

}  // namespace seads
