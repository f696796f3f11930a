#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "regretforge/config.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/trainer.hpp"

using namespace regretforge;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const std::string& name) -> std::optional<std::string> {
    const auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

std::filesystem::path write_config(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "regretforge_tests";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / name) << body;
  return dir / name;
}

std::string config_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("env names") {
  CHECK(env_name("navigator.lr") == "REGRETFORGE_NAVIGATOR_LR");
  CHECK(env_name("K") == "REGRETFORGE_K");
  const auto keys = config_keys();
  CHECK(std::find(keys.begin(), keys.end(), "adversary.baseline_decay") != keys.end());
  CHECK(std::find(keys.begin(), keys.end(), "iters") != keys.end());
}

TEST_CASE("defaults survive a json roundtrip") {
  const TrainConfig defaults;
  const auto back = config_from_json(config_to_json(defaults));
  CHECK(config_to_json(back) == config_to_json(defaults));
  CHECK(config_from_json("{}").algorithm == Algorithm::flexible_b);
}

TEST_CASE("partial documents layer over defaults") {
  const auto c = config_from_json(R"({"algo": "dr", "navigator": {"hidden": 12}, "primitive_subset": ["submit"]})");
  CHECK(c.algorithm == Algorithm::dr);
  CHECK(c.navigator.hidden == 12);
  CHECK(c.navigator.embed == 32);
  CHECK(c.primitive_subset == std::vector<std::string>{"submit"});
}

TEST_CASE("resolution order is file, then environment, then flags") {
  const auto file = write_config("order.json", R"({"iters": 10, "seed": 1, "K": 2, "navigator": {"lr": 0.01}})");
  const auto env = env_of({{"REGRETFORGE_SEED", "2"}, {"REGRETFORGE_K", "4"}, {"REGRETFORGE_NAVIGATOR_LR", "0.5"}});
  const auto c = resolve_config(file, {{"K", "5"}}, env);
  CHECK(c.iterations == 10);
  CHECK(c.seed == 2);
  CHECK(c.max_pages == 5);
  CHECK(c.navigator_lr == 0.5);

  const auto no_env = resolve_config(file, {}, env_of({}));
  CHECK(no_env.seed == 1);
  CHECK(resolve_config(std::nullopt, {}, env_of({})).iterations == TrainConfig{}.iterations);
}

TEST_CASE("errors name the offending field") {
  CHECK(config_error([] { config_from_json(R"({"iters": "many"})"); }).find("'iters'") != std::string::npos);
  CHECK(config_error([] { config_from_json(R"({"navigator": {"width": 3}})"); }).find("'navigator.width'") !=
        std::string::npos);
  CHECK(config_error([] { config_from_json(R"({"algo": "ppo"})"); }) != "");
  CHECK(config_error([] { config_from_json(R"({"gamma": 2.0})"); }).find("'gamma'") != std::string::npos);
  CHECK(config_error([] { config_from_json("{not json"); }) != "");
  CHECK(config_error([] { resolve_config(std::nullopt, {{"seed", "-1"}}, env_of({})); }).find("'seed'") !=
        std::string::npos);
  CHECK(config_error([] { resolve_config(std::nullopt, {{"bogus", "1"}}, env_of({})); }).find("'bogus'") !=
        std::string::npos);
  CHECK(config_error([] { resolve_config(std::nullopt, {}, env_of({{"REGRETFORGE_M", "x"}})); })
            .find("REGRETFORGE_M") != std::string::npos);
  CHECK(config_error([] { resolve_config(std::filesystem::path("/nonexistent/c.json"), {}, env_of({})); }) != "");
}
