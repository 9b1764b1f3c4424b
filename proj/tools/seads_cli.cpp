// Command-line front end: train, baseline-sac, count-skills, eval-success, gen-boards.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seads/baseline.hpp"
#include "seads/checkpoint.hpp"
#include "seads/config.hpp"
#include "seads/evaluation.hpp"
#include "seads/metrics.hpp"
#include "seads/planner.hpp"

namespace fs = std::filesystem;
using namespace seads;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string profile;
  std::string checkpoint;
  std::string out;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve_config(const CommonOptions& o) {
  const std::string base = o.profile.empty() ? "lightsout-cursor" : o.profile;
  RunConfig c = o.config_path.empty() ? profile_config(base) : load_config(o.config_path, base);
  if (!o.profile.empty() && !o.config_path.empty() && c.profile != o.profile)
    throw ConfigError("profile", "config file selects \"" + c.profile + "\" but --profile is \"" + o.profile + "\"");
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// --out, else $SEADS_OUT_DIR, else the configured directory.
fs::path output_dir(const CommonOptions& o, const std::string& configured) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("SEADS_OUT_DIR"); env && *env) return env;
  return configured;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Keeps the header and the first `rows` data rows of an existing metrics file.
void truncate_csv(const fs::path& path, std::int64_t rows) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("resume: metrics file missing: " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  in.close();
  if (lines.empty() || lines[0] != kEpochCsvHeader) throw std::runtime_error("resume: unexpected metrics header");
  if (static_cast<std::int64_t>(lines.size()) - 1 < rows)
    throw std::runtime_error("resume: metrics file has fewer rows than the checkpoint's epoch count");
  auto out = open_out(path);
  for (std::int64_t i = 0; i <= rows; ++i) out << lines[static_cast<std::size_t>(i)] << '\n';
}

int cmd_train(const CommonOptions& o) {
  RunConfig config;
  std::unique_ptr<SeadsTrainer> trainer;
  if (!o.checkpoint.empty()) {
    auto ckpt = load_checkpoint(o.checkpoint);
    config = ckpt.config;
    trainer = std::move(ckpt.trainer);
    if (!o.config_path.empty() && config_to_json(resolve_config(o)) != config_to_json(config))
      throw ConfigError("config", "differs from the configuration stored in the checkpoint");
  } else {
    config = resolve_config(o);
    trainer = std::make_unique<SeadsTrainer>(config.seads());
  }
  const fs::path dir = output_dir(o, config.output_dir);
  fs::create_directories(dir);
  const fs::path metrics_path = dir / "metrics.csv";
  const fs::path ckpt_path = dir / "checkpoint.bin";
  {
    std::ofstream cfg = open_out(dir / "config.json");
    cfg << config_to_json(config) << '\n';
  }
  if (trainer->epoch() > 0) {
    truncate_csv(metrics_path, trainer->epoch());
  } else {
    auto out = open_out(metrics_path);
    out << kEpochCsvHeader << '\n';
  }
  auto metrics = open_out(metrics_path, std::ios::app);
  std::cerr << "training " << game_name(config.game.kind) << " K=" << config.skills() << " for "
            << config.train.env_steps << " env steps -> " << dir.string() << '\n';
  trainer->train([&](const EpochMetrics& m) {
    metrics << epoch_csv_row(m) << '\n';
    metrics.flush();
    if (config.checkpoint_every > 0 && m.epoch % config.checkpoint_every == 0)
      save_checkpoint(ckpt_path.string(), config, *trainer);
    if (m.epoch % 50 == 0)
      std::cerr << "epoch " << m.epoch << " steps " << m.env_steps << " reward " << m.mean_reward << " fm_nll "
                << m.fm_nll << '\n';
  });
  save_checkpoint(ckpt_path.string(), config, *trainer);
  std::cout << "checkpoint: " << ckpt_path.string() << "\nmetrics: " << metrics_path.string() << '\n';
  return 0;
}

int cmd_baseline(const CommonOptions& o) {
  const RunConfig config = resolve_config(o);
  const fs::path dir = output_dir(o, config.output_dir);
  auto metrics = open_out(dir / "baseline_metrics.csv");
  metrics << kBaselineCsvHeader << '\n';
  FlatSacTrainer trainer(config);
  trainer.train([&](const BaselineMetrics& m) {
    metrics << baseline_csv_row(m) << '\n';
    metrics.flush();
  });
  const auto env = config.seads().env;
  const auto report = eval_flat(env, trainer.agent(), config.baseline.step_limit_factor, config.eval.tasks_per_depth,
                                *config.seed, config.eval.max_depth);
  auto depths = open_out(dir / "baseline_eval_depths.csv");
  write_depth_csv(depths, report);
  auto tasks = open_out(dir / "baseline_eval_tasks.csv");
  write_task_csv(tasks, report);
  std::cout << "baseline success rate: " << report.success_rate() << '\n';
  return 0;
}

int cmd_count_skills(const CommonOptions& o, int states, const std::string& game, bool oracle) {
  RunConfig config;
  std::unique_ptr<SeadsTrainer> trainer;
  if (oracle) {
    config = resolve_config(o);
  } else {
    if (o.checkpoint.empty()) throw std::invalid_argument("count-skills needs --checkpoint (or --oracle)");
    auto ckpt = load_checkpoint(o.checkpoint);
    config = ckpt.config;
    trainer = std::move(ckpt.trainer);
    if (o.seed) config.seed = *o.seed;
  }
  if (!game.empty() && parse_game(game) != config.game.kind)
    throw std::invalid_argument("--game " + game + " does not match the checkpoint's game " +
                                std::string(game_name(config.game.kind)));
  const auto sc = config.seads();
  const int n = states > 0 ? states : config.eval.count_states;
  SkillCountReport report;
  if (oracle) {
    const ScriptedSkills policy(sc.env);
    report = count_skills(sc.env, policy, sc.num_skills, n, *config.seed, config.eval.max_depth);
  } else {
    const SkillAgentPolicy policy(trainer->agent(), sc.num_skills, sac::ActMode::deterministic);
    report = count_skills(sc.env, policy, sc.num_skills, n, *config.seed, config.eval.max_depth);
  }
  if (!o.out.empty() || std::getenv("SEADS_OUT_DIR")) {
    auto out = open_out(output_dir(o, config.output_dir) / "count_skills.csv");
    out << "state,unique_moves\n";
    for (std::size_t i = 0; i < report.unique_moves.size(); ++i) out << i << ',' << report.unique_moves[i] << '\n';
  }
  std::cout << "mean unique moves: " << fixed2(report.mean_unique_moves) << " of " << move_count(config.game)
            << " (K=" << sc.num_skills << ", N=" << n << ")\n";
  return 0;
}

int cmd_eval_success(const CommonOptions& o, bool replan, bool oracle) {
  RunConfig config;
  std::unique_ptr<SeadsTrainer> trainer;
  if (oracle) {
    config = resolve_config(o);
  } else {
    if (o.checkpoint.empty()) throw std::invalid_argument("eval-success needs --checkpoint (or --oracle)");
    auto ckpt = load_checkpoint(o.checkpoint);
    config = ckpt.config;
    trainer = std::move(ckpt.trainer);
    if (o.seed) config.seed = *o.seed;
  }
  const auto sc = config.seads();
  EvalReport report;
  if (oracle) {
    const ScriptedSkills policy(sc.env);
    const planning::GameSuccessors model(sc.env.game);
    report = eval_success(sc.env, policy, model, config.planner, replan, config.eval.tasks_per_depth, *config.seed,
                          config.eval.max_depth);
  } else {
    const auto* fm = dynamic_cast<const skills::ForwardModel*>(&trainer->skill_model());
    if (!fm) throw std::invalid_argument("planning needs a forward model; this checkpoint holds a discriminator");
    const SkillAgentPolicy policy(trainer->agent(), sc.num_skills, sac::ActMode::deterministic);
    const planning::ForwardModelSuccessors model(*fm);
    report = eval_success(sc.env, policy, model, config.planner, replan, config.eval.tasks_per_depth, *config.seed,
                          config.eval.max_depth);
  }
  if (!o.out.empty() || std::getenv("SEADS_OUT_DIR")) {
    const auto dir = output_dir(o, config.output_dir);
    const std::string suffix = replan ? "_replan" : "";
    auto depths = open_out(dir / ("eval_depths" + suffix + ".csv"));
    write_depth_csv(depths, report);
    auto tasks = open_out(dir / ("eval_tasks" + suffix + ".csv"));
    write_task_csv(tasks, report);
  }
  for (const auto& d : report.depths)
    std::cout << "depth " << d.depth << ": " << d.successes << "/" << d.tasks << '\n';
  std::cout << "success rate: " << fixed2(100.0 * report.success_rate()) << "%" << (replan ? " (replanning)" : "")
            << "\nplanning time mean " << report.mean_planning_seconds() << " s, max "
            << report.max_planning_seconds() << " s\n";
  return 0;
}

std::vector<int> parse_depths(const std::string& text) {
  std::vector<int> depths;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      depths.push_back(std::stoi(item));
    } else {
      for (int d = std::stoi(item.substr(0, dash)); d <= std::stoi(item.substr(dash + 1)); ++d) depths.push_back(d);
    }
  }
  for (int d : depths)
    if (d < 1 || d > BoardCatalog::kMaxDepth) throw std::invalid_argument("--depths must lie in [1, 5]");
  return depths;
}

int cmd_gen_boards(const std::string& game, int board_size, const std::string& depths, const std::string& out) {
  const GameKind kind = parse_game(game);
  const GameSpec spec = kind == GameKind::lights_out ? GameSpec::lights_out(board_size) : GameSpec::tile_swap();
  const auto ds = parse_depths(depths);
  std::size_t lines = 0;
  if (out.empty() || out == "-") {
    lines = write_board_set(std::cout, spec, ds);
  } else {
    auto file = open_out(out);
    lines = write_board_set(file, spec, ds);
    if (!file.flush()) throw std::runtime_error("write failed: " + out);
  }
  std::cerr << lines << " boards\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skill discovery and symbolic planning on embedded board games"};
  app.require_subcommand(1);

  CommonOptions o;
  const auto add_common = [&](CLI::App* cmd, bool config_flags) {
    if (config_flags) {
      cmd->add_option("--config", o.config_path, "Run configuration (JSON)");
      cmd->add_option("--profile", o.profile, "Base profile: fast, lightsout-cursor, tileswap-cursor");
    }
    cmd->add_option("--seed", o.seed, "Seed (overrides the configuration)");
    cmd->add_option("--out", o.out, "Output directory (default: $SEADS_OUT_DIR, then the configured one)");
  };

  auto* train = app.add_subcommand("train", "Train skills and forward model");
  add_common(train, true);
  train->add_option("--checkpoint", o.checkpoint, "Resume from this checkpoint");

  auto* baseline = app.add_subcommand("baseline-sac", "Train and evaluate the flat SAC baseline");
  add_common(baseline, true);

  int states = 0;
  std::string game;
  bool oracle = false;
  auto* count = app.add_subcommand("count-skills", "Mean number of unique game moves covered by the skills");
  add_common(count, true);
  count->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  count->add_option("--states", states, "Number of initial states (default from config: 100)");
  count->add_option("--game", game, "Expected game; rejected if it differs from the checkpoint");
  count->add_flag("--oracle", oracle, "Use scripted oracle skills instead of a checkpoint");

  bool replan = false;
  auto* eval = app.add_subcommand("eval-success", "Task success of planning with the learned skills");
  add_common(eval, true);
  eval->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  eval->add_flag("--replan", replan, "Replan when the reached state differs from the prediction");
  eval->add_flag("--oracle", oracle, "Use scripted skills and true game dynamics");

  std::string depths = "1-5";
  int board_size = 5;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-boards", "Export boards with depth and split label");
  gen->add_option("--game", game, "lightsout or tileswap")->required();
  gen->add_option("--board-size", board_size, "LightsOut edge length");
  gen->add_option("--depths", depths, "Depths, e.g. 1-5 or 1,3");
  gen->add_option("--out", gen_out, "Output file ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(o);
    if (*baseline) return cmd_baseline(o);
    if (*count) return cmd_count_skills(o, states, game, oracle);
    if (*eval) return cmd_eval_success(o, replan, oracle);
    if (*gen) return cmd_gen_boards(game, board_size, depths, gen_out);
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
