#include "seads/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace seads {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads fields of one JSON object, tracking which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    const auto path = join(path_, key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(path, "expected true or false");
      out = it->template get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(path, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_unsigned() || it->template get<std::int64_t>() >= 0)
          out = it->template get<T>();
        else
          throw ConfigError(path, "expected a non-negative integer");
      } else {
        out = it->template get<T>();
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(path, "expected a number");
      out = it->template get<T>();
    } else {
      if (!it->is_string()) throw ConfigError(path, "expected a string");
      out = it->template get<std::string>();
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T value{};
    get(key, value);
    out = value;
  }

  /// Nested object reader, or nullopt if the key is absent.
  std::optional<ObjectReader> object(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return ObjectReader(*it, join(path_, key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key)) throw ConfigError(join(path_, key), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

}  // namespace

int move_count(const GameSpec& spec) { return static_cast<int>(enumerate_moves(spec).size()); }

int RunConfig::skills() const {
  if (num_skills) return *num_skills;
  const int moves = move_count(game);
  return ablations.more_skills ? moves + (moves + 4) / 5 : moves;
}

SeadsConfig RunConfig::seads() const {
  SeadsConfig c;
  c.env = env;
  c.env.game = game;
  c.num_skills = skills();
  c.train = train;
  c.sac = sac;
  c.skill_model = skill_model;
  c.reward.num_skills = c.num_skills;
  c.reward.second_best_norm = second_best_norm && !ablations.no_second_best;
  // the discriminator has no likelihood to measure novelty with
  c.reward.novelty_bonus = novelty_bonus && !ablations.no_novelty && !ablations.vic_discriminator;
  c.skill_model.discriminator = skill_model.discriminator || ablations.vic_discriminator;
  if (ablations.no_relabel || ablations.no_fm_relabel) c.train.fm_relabel = false;
  if (ablations.no_relabel || ablations.no_sac_relabel) c.train.sac_relabel = false;
  c.seed = seed.value_or(0);
  return c;
}

void RunConfig::validate() const {
  require(seed.has_value(), "seed", "missing (every run needs an explicit seed)");
  require(manipulator == "cursor", "manipulator", "only \"cursor\" is supported");
  if (game.kind == GameKind::lights_out)
    require(game.size >= 2 && game.size <= 5, "board_size", "LightsOut board size must be in [2, 5]");
  else
    require(game.size == 3, "board_size", "TileSwap board size is 3");
  require(!num_skills || *num_skills >= 2, "num_skills", "must be >= 2");
  require(!(num_skills && ablations.more_skills), "ablations.more_skills",
          "conflicts with an explicit num_skills");
  require(checkpoint_every >= 0, "checkpoint_every", "must be >= 0");
  require(!output_dir.empty(), "output_dir", "must not be empty");
  require(planner.wall_time_seconds > 0.0, "planner.wall_time_seconds", "must be > 0");
  require(planner.max_depth >= 1, "planner.max_depth", "must be >= 1");
  require(planner.replan_budget >= 0, "planner.replan_budget", "must be >= 0");
  require(eval.tasks_per_depth >= 1, "eval.tasks_per_depth", "must be >= 1");
  require(eval.count_states >= 1, "eval.count_states", "must be >= 1");
  require(eval.max_depth >= 1 && eval.max_depth <= BoardCatalog::kMaxDepth, "eval.max_depth", "must be in [1, 5]");
  require(baseline.env_steps >= 1 && baseline.hidden >= 1 && baseline.hidden_layers >= 1 && baseline.buffer >= 1 &&
              baseline.batch >= 1 && baseline.samples_per_update >= 1 && baseline.step_limit_factor >= 1 &&
              baseline.log_every_episodes >= 1,
          "baseline", "counts must be positive");
  require(baseline.alpha > 0.0 && baseline.learning_rate > 0.0, "baseline", "alpha and learning_rate must be > 0");
  const auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(section, e.what());
    }
  };
  const auto c = seads();
  wrap("env", [&] { c.env.validate(); });
  wrap("train", [&] { c.train.validate(); });
  wrap("sac", [&] {
    if (!(c.sac.learning_rate > 0) || !(c.sac.alpha > 0) || c.sac.tau <= 0 || c.sac.tau > 1 || c.sac.gamma < 0 ||
        c.sac.gamma > 1 || c.sac.hidden < 1 || c.sac.hidden_layers < 1)
      throw std::invalid_argument("learning_rate, alpha > 0; tau in (0, 1]; gamma in [0, 1]; hidden sizes >= 1");
  });
  wrap("skill_model", [&] {
    if (c.skill_model.hidden < 1 || !(c.skill_model.learning_rate > 0))
      throw std::invalid_argument("hidden >= 1 and learning_rate > 0 required");
  });
  wrap("config", [&] { c.validate(); });
}

std::vector<std::string> profile_names() { return {"fast", "lightsout-cursor", "tileswap-cursor"}; }

RunConfig profile_config(std::string_view name) {
  RunConfig c;
  c.profile = std::string(name);
  if (name == "lightsout-cursor") {
    c.game = GameSpec::lights_out(5);
  } else if (name == "tileswap-cursor") {
    c.game = GameSpec::tile_swap();
  } else if (name == "fast") {
    c.game = GameSpec::lights_out(3);
    c.train.env_steps = 50000;
    c.baseline.env_steps = 50000;
    c.checkpoint_every = 0;
  } else {
    throw ConfigError("profile", "unknown profile \"" + std::string(name) + "\"");
  }
  c.env.game = c.game;
  return c;
}

RunConfig parse_config(std::string_view json_text, std::string_view base_profile) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  ObjectReader r(root, "");
  std::string profile(base_profile);
  r.get("profile", profile);
  RunConfig c = profile_config(profile);

  std::string game = std::string(game_name(c.game.kind));
  int board_size = c.game.size;
  r.get("game", game);
  r.get("board_size", board_size);
  try {
    c.game.kind = parse_game(game);
  } catch (const std::exception&) {
    throw ConfigError("game", "expected \"lightsout\" or \"tileswap\"");
  }
  if (c.game.kind == GameKind::tile_swap && !root.contains("board_size")) board_size = 3;
  c.game.size = board_size;
  c.env.game = c.game;

  r.get("manipulator", c.manipulator);
  r.get("num_skills", c.num_skills);
  r.get("seed", c.seed);
  r.get("output_dir", c.output_dir);
  r.get("checkpoint_every", c.checkpoint_every);

  if (auto o = r.object("env")) {
    o->get("max_displacement", c.env.max_displacement);
    o->get("step_limit", c.env.step_limit);
    o->get("trigger_threshold", c.env.trigger_threshold);
    o->get("swap_region_ratio", c.env.swap_region_ratio);
    o->finish();
  }
  if (auto o = r.object("train")) {
    auto& t = c.train;
    o->get("episodes_per_epoch", t.episodes_per_epoch);
    o->get("env_steps", t.env_steps);
    o->get("long_buffer", t.long_buffer);
    o->get("recent_buffer", t.recent_buffer);
    o->get("sample_size", t.sample_size);
    o->get("fm_relabel_fraction", t.fm_relabel_fraction);
    o->get("sac_relabel_fraction", t.sac_relabel_fraction);
    o->get("fm_relabel", t.fm_relabel);
    o->get("sac_relabel", t.sac_relabel);
    o->get("sac_updates", t.sac_updates);
    o->get("sac_batch", t.sac_batch);
    o->get("fm_updates", t.fm_updates);
    o->get("fm_batch", t.fm_batch);
    o->get("max_board_depth", t.max_board_depth);
    o->finish();
  }
  if (auto o = r.object("sac")) {
    o->get("learning_rate", c.sac.learning_rate);
    o->get("tau", c.sac.tau);
    o->get("gamma", c.sac.gamma);
    o->get("alpha", c.sac.alpha);
    o->get("hidden", c.sac.hidden);
    o->get("hidden_layers", c.sac.hidden_layers);
    o->finish();
  }
  if (auto o = r.object("reward")) {
    o->get("second_best_norm", c.second_best_norm);
    o->get("novelty_bonus", c.novelty_bonus);
    o->finish();
  }
  if (auto o = r.object("skill_model")) {
    o->get("discriminator", c.skill_model.discriminator);
    o->get("hidden", c.skill_model.hidden);
    o->get("learning_rate", c.skill_model.learning_rate);
    o->finish();
  }
  if (auto o = r.object("ablations")) {
    auto& a = c.ablations;
    o->get("no_relabel", a.no_relabel);
    o->get("no_sac_relabel", a.no_sac_relabel);
    o->get("no_fm_relabel", a.no_fm_relabel);
    o->get("no_second_best", a.no_second_best);
    o->get("no_novelty", a.no_novelty);
    o->get("vic_discriminator", a.vic_discriminator);
    o->get("more_skills", a.more_skills);
    o->finish();
  }
  if (auto o = r.object("planner")) {
    o->get("wall_time_seconds", c.planner.wall_time_seconds);
    o->get("max_depth", c.planner.max_depth);
    o->get("replan_budget", c.planner.replan_budget);
    o->finish();
  }
  if (auto o = r.object("eval")) {
    o->get("tasks_per_depth", c.eval.tasks_per_depth);
    o->get("count_states", c.eval.count_states);
    o->get("max_depth", c.eval.max_depth);
    o->finish();
  }
  if (auto o = r.object("baseline")) {
    auto& b = c.baseline;
    o->get("env_steps", b.env_steps);
    o->get("hidden", b.hidden);
    o->get("hidden_layers", b.hidden_layers);
    o->get("alpha", b.alpha);
    o->get("learning_rate", b.learning_rate);
    o->get("buffer", b.buffer);
    o->get("batch", b.batch);
    o->get("samples_per_update", b.samples_per_update);
    o->get("step_limit_factor", b.step_limit_factor);
    o->get("log_every_episodes", b.log_every_episodes);
    o->finish();
  }
  r.finish();
  return c;
}

RunConfig load_config(const std::string& path, std::string_view base_profile) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), base_profile);
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["profile"] = c.profile;
  j["game"] = std::string(game_name(c.game.kind));
  j["board_size"] = c.game.size;
  j["manipulator"] = c.manipulator;
  j["num_skills"] = c.num_skills ? json(*c.num_skills) : json(nullptr);
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["output_dir"] = c.output_dir;
  j["checkpoint_every"] = c.checkpoint_every;
  j["env"] = {{"max_displacement", c.env.max_displacement},
              {"step_limit", c.env.step_limit},
              {"trigger_threshold", c.env.trigger_threshold},
              {"swap_region_ratio", c.env.swap_region_ratio}};
  const auto& t = c.train;
  j["train"] = {{"episodes_per_epoch", t.episodes_per_epoch},
                {"env_steps", t.env_steps},
                {"long_buffer", t.long_buffer},
                {"recent_buffer", t.recent_buffer},
                {"sample_size", t.sample_size},
                {"fm_relabel_fraction", t.fm_relabel_fraction},
                {"sac_relabel_fraction", t.sac_relabel_fraction},
                {"fm_relabel", t.fm_relabel},
                {"sac_relabel", t.sac_relabel},
                {"sac_updates", t.sac_updates},
                {"sac_batch", t.sac_batch},
                {"fm_updates", t.fm_updates},
                {"fm_batch", t.fm_batch},
                {"max_board_depth", t.max_board_depth}};
  j["sac"] = {{"learning_rate", c.sac.learning_rate}, {"tau", c.sac.tau},       {"gamma", c.sac.gamma},
              {"alpha", c.sac.alpha},                 {"hidden", c.sac.hidden}, {"hidden_layers", c.sac.hidden_layers}};
  j["reward"] = {{"second_best_norm", c.second_best_norm}, {"novelty_bonus", c.novelty_bonus}};
  j["skill_model"] = {{"discriminator", c.skill_model.discriminator},
                      {"hidden", c.skill_model.hidden},
                      {"learning_rate", c.skill_model.learning_rate}};
  const auto& a = c.ablations;
  j["ablations"] = {{"no_relabel", a.no_relabel},         {"no_sac_relabel", a.no_sac_relabel},
                    {"no_fm_relabel", a.no_fm_relabel},   {"no_second_best", a.no_second_best},
                    {"no_novelty", a.no_novelty},         {"vic_discriminator", a.vic_discriminator},
                    {"more_skills", a.more_skills}};
  j["planner"] = {{"wall_time_seconds", c.planner.wall_time_seconds},
                  {"max_depth", c.planner.max_depth},
                  {"replan_budget", c.planner.replan_budget}};
  j["eval"] = {{"tasks_per_depth", c.eval.tasks_per_depth},
               {"count_states", c.eval.count_states},
               {"max_depth", c.eval.max_depth}};
  const auto& b = c.baseline;
  j["baseline"] = {{"env_steps", b.env_steps},
                   {"hidden", b.hidden},
                   {"hidden_layers", b.hidden_layers},
                   {"alpha", b.alpha},
                   {"learning_rate", b.learning_rate},
                   {"buffer", b.buffer},
                   {"batch", b.batch},
                   {"samples_per_update", b.samples_per_update},
                   {"step_limit_factor", b.step_limit_factor},
                   {"log_every_episodes", b.log_every_episodes}};
  return j.dump(2);
}

}  // namespace seads
