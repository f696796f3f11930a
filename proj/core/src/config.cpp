#include "regretforge/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "regretforge/errors.hpp"

namespace regretforge {

using nlohmann::json;

namespace {

json to_json(const TrainConfig& c) {
  json j;
  j["algo"] = std::string(to_string(c.algorithm));
  j["K"] = c.max_pages;
  j["N"] = c.design_steps;
  j["M"] = c.episodes;
  j["iters"] = c.iterations;
  j["gamma"] = c.gamma;
  j["lambda_budget"] = c.lambda_budget;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["eval_every"] = c.eval_every;
  j["eval_episodes"] = c.eval_episodes;
  j["eval_tasks"] = c.eval_tasks;
  j["checkpoint_every"] = c.checkpoint_every;
  j["primitive_subset"] = c.primitive_subset;
  j["navigator"] = {{"embed", c.navigator.embed},
                    {"hidden", c.navigator.hidden},
                    {"value_hidden", c.navigator.value_hidden},
                    {"lr", c.navigator_lr},
                    {"value_coef", c.value_coef},
                    {"entropy_coef", c.entropy_coef},
                    {"grad_clip", c.navigator_grad_clip}};
  j["adversary"] = {{"hidden", c.adversary_hidden},
                    {"lr", c.adversary_lr},
                    {"entropy_coef", c.adversary_entropy_coef},
                    {"grad_clip", c.adversary_grad_clip},
                    {"baseline_decay", c.baseline_decay}};
  j["cl"] = {{"p0", c.cl_p0}, {"fraction", c.cl_fraction}};
  return j;
}

template <typename T>
T get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "': wrong type");
  }
}

TrainConfig from_json(const json& j) {
  TrainConfig c;
  c.algorithm = algorithm_from_string(get<std::string>(j.at("algo"), "algo"));
  c.max_pages = get<int>(j.at("K"), "K");
  c.design_steps = get<int>(j.at("N"), "N");
  c.episodes = get<int>(j.at("M"), "M");
  c.iterations = get<std::int64_t>(j.at("iters"), "iters");
  c.gamma = get<double>(j.at("gamma"), "gamma");
  c.lambda_budget = get<double>(j.at("lambda_budget"), "lambda_budget");
  c.seed = get<std::uint64_t>(j.at("seed"), "seed");
  c.workers = get<int>(j.at("workers"), "workers");
  c.eval_every = get<std::int64_t>(j.at("eval_every"), "eval_every");
  c.eval_episodes = get<int>(j.at("eval_episodes"), "eval_episodes");
  c.eval_tasks = get<std::string>(j.at("eval_tasks"), "eval_tasks");
  c.checkpoint_every = get<std::int64_t>(j.at("checkpoint_every"), "checkpoint_every");
  c.primitive_subset = get<std::vector<std::string>>(j.at("primitive_subset"), "primitive_subset");
  const auto& n = j.at("navigator");
  c.navigator.embed = get<int>(n.at("embed"), "navigator.embed");
  c.navigator.hidden = get<int>(n.at("hidden"), "navigator.hidden");
  c.navigator.value_hidden = get<int>(n.at("value_hidden"), "navigator.value_hidden");
  c.navigator_lr = get<double>(n.at("lr"), "navigator.lr");
  c.value_coef = get<double>(n.at("value_coef"), "navigator.value_coef");
  c.entropy_coef = get<double>(n.at("entropy_coef"), "navigator.entropy_coef");
  c.navigator_grad_clip = get<double>(n.at("grad_clip"), "navigator.grad_clip");
  const auto& a = j.at("adversary");
  c.adversary_hidden = get<int>(a.at("hidden"), "adversary.hidden");
  c.adversary_lr = get<double>(a.at("lr"), "adversary.lr");
  c.adversary_entropy_coef = get<double>(a.at("entropy_coef"), "adversary.entropy_coef");
  c.adversary_grad_clip = get<double>(a.at("grad_clip"), "adversary.grad_clip");
  c.baseline_decay = get<double>(a.at("baseline_decay"), "adversary.baseline_decay");
  const auto& cl = j.at("cl");
  c.cl_p0 = get<double>(cl.at("p0"), "cl.p0");
  c.cl_fraction = get<double>(cl.at("fraction"), "cl.fraction");
  c.validate();
  return c;
}

bool same_kind(const json& def, const json& v) {
  if (def.is_number_unsigned()) return v.is_number_unsigned();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_array()) return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
  return def.type() == v.type();
}

// Overlays `src` onto `dst`, rejecting keys the schema does not define.
void merge(json& dst, const json& src, const std::string& prefix) {
  if (!src.is_object()) throw ConfigError("config " + (prefix.empty() ? std::string("document") : "field '" + prefix + "'") + ": expected an object");
  for (const auto& [key, value] : src.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!dst.contains(key)) throw ConfigError("config field '" + path + "': unknown key");
    auto& slot = dst[key];
    if (slot.is_object()) {
      merge(slot, value, path);
    } else {
      if (!same_kind(slot, value)) throw ConfigError("config field '" + path + "': wrong type");
      slot = value;
    }
  }
}

json* leaf(json& root, std::string_view key) {
  json* node = &root;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part(key.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos));
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return node->is_object() ? nullptr : node;
}

// Parses a textual override according to the type of the default value it replaces.
void assign_text(json& slot, const std::string& key, const std::string& text, const std::string& origin) {
  const auto bad = [&] { return ConfigError("config field '" + key + "' (from " + origin + "): cannot parse '" + text + "'"); };
  try {
    std::size_t used = 0;
    if (slot.is_number_unsigned()) {
      if (!text.empty() && text[0] == '-') throw bad();
      const auto v = std::stoull(text, &used);
      if (used != text.size()) throw bad();
      slot = v;
    } else if (slot.is_number_integer()) {
      const auto v = std::stoll(text, &used);
      if (used != text.size()) throw bad();
      slot = v;
    } else if (slot.is_number()) {
      const auto v = std::stod(text, &used);
      if (used != text.size()) throw bad();
      slot = v;
    } else if (slot.is_array()) {
      json arr = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) arr.push_back(item);
      }
      slot = arr;
    } else {
      slot = text;
    }
  } catch (const std::invalid_argument&) {
    throw bad();
  } catch (const std::out_of_range&) {
    throw bad();
  }
}

void collect_keys(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      collect_keys(value, path, out);
    } else {
      out.push_back(path);
    }
  }
}

json parse_document(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  collect_keys(to_json(TrainConfig{}), "", keys);
  return keys;
}

std::string env_name(std::string_view key) {
  std::string out = "REGRETFORGE_";
  for (char ch : key) out.push_back(ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  return out;
}

TrainConfig resolve_config(const std::optional<std::filesystem::path>& file,
                           const std::vector<std::pair<std::string, std::string>>& flags, const EnvLookup& env) {
  json j = to_json(TrainConfig{});
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + file->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    merge(j, parse_document(ss.str(), file->string()), "");
  }
  if (env) {
    for (const auto& key : config_keys()) {
      if (auto v = env(env_name(key))) assign_text(*leaf(j, key), key, *v, env_name(key));
    }
  }
  for (const auto& [key, value] : flags) {
    json* slot = leaf(j, key);
    if (!slot) throw ConfigError("config field '" + key + "': unknown key");
    assign_text(*slot, key, value, "--" + key);
  }
  return from_json(j);
}

TrainConfig config_from_json(std::string_view text) {
  json j = to_json(TrainConfig{});
  merge(j, parse_document(text, "config"), "");
  return from_json(j);
}

std::string config_to_json(const TrainConfig& config, int indent) { return to_json(config).dump(indent); }

}  // namespace regretforge
