#include "regretforge/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "regretforge/config.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/site.hpp"

#ifndef REGRETFORGE_VERSION
#define REGRETFORGE_VERSION "unknown"
#endif

namespace regretforge {

using nlohmann::json;

std::string_view library_version() { return REGRETFORGE_VERSION; }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::paired: return "paired";
    case Algorithm::flexible: return "flexible";
    case Algorithm::paired_b: return "paired_b";
    case Algorithm::dr: return "dr";
    case Algorithm::cl: return "cl";
    case Algorithm::flexible_b: break;
  }
  return "flexible_b";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (auto a : {Algorithm::paired, Algorithm::flexible, Algorithm::flexible_b, Algorithm::paired_b, Algorithm::dr,
                 Algorithm::cl}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("config field 'algo': unknown algorithm '" + std::string(name) +
                    "' (expected paired, flexible, flexible_b, paired_b, dr or cl)");
}

bool uses_adversary(Algorithm a) { return a != Algorithm::dr && a != Algorithm::cl; }
bool uses_budget(Algorithm a) { return a == Algorithm::flexible_b || a == Algorithm::paired_b; }
bool uses_flexible_regret(Algorithm a) { return a != Algorithm::paired && a != Algorithm::paired_b; }

void TrainConfig::validate() const {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string("config field '") + field + "': " + what);
  };
  need(max_pages >= 1, "K", "must be >= 1");
  need(design_steps >= 1, "N", "must be >= 1");
  need(episodes >= 1, "M", "must be >= 1");
  need(iterations >= 0, "iters", "must be >= 0");
  need(gamma > 0.0 && gamma <= 1.0, "gamma", "must lie in (0, 1]");
  need(lambda_budget >= 0.0, "lambda_budget", "must be >= 0");
  need(workers >= 1, "workers", "must be >= 1");
  need(eval_every >= 0, "eval_every", "must be >= 0");
  need(eval_episodes >= 1, "eval_episodes", "must be >= 1");
  need(checkpoint_every >= 0, "checkpoint_every", "must be >= 0");
  need(navigator.embed >= 1, "navigator.embed", "must be >= 1");
  need(navigator.hidden >= 1, "navigator.hidden", "must be >= 1");
  need(navigator.value_hidden >= 1, "navigator.value_hidden", "must be >= 1");
  need(navigator_lr > 0.0, "navigator.lr", "must be > 0");
  need(value_coef >= 0.0, "navigator.value_coef", "must be >= 0");
  need(entropy_coef >= 0.0, "navigator.entropy_coef", "must be >= 0");
  need(navigator_grad_clip >= 0.0, "navigator.grad_clip", "must be >= 0");
  need(adversary_hidden >= 1, "adversary.hidden", "must be >= 1");
  need(adversary_lr > 0.0, "adversary.lr", "must be > 0");
  need(adversary_entropy_coef >= 0.0, "adversary.entropy_coef", "must be >= 0");
  need(adversary_grad_clip >= 0.0, "adversary.grad_clip", "must be >= 0");
  need(baseline_decay >= 0.0 && baseline_decay < 1.0, "adversary.baseline_decay", "must lie in [0, 1)");
  need(cl_p0 > 0.0 && cl_p0 <= 1.0, "cl.p0", "must lie in (0, 1]");
  need(cl_fraction > 0.0 && cl_fraction <= 1.0, "cl.fraction", "must lie in (0, 1]");
  for (const auto& name : primitive_subset) {
    if (!catalog().contains(name)) throw ConfigError("config field 'primitive_subset': unknown primitive '" + name + "'");
  }
  try {
    select_tasks(eval_tasks);
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("config field 'eval_tasks': ") + e.what());
  }
}

std::vector<PrimitiveId> TrainConfig::subset_ids() const {
  std::vector<PrimitiveId> ids;
  for (const auto& name : primitive_subset) ids.push_back(catalog().lookup(name).id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

ClSchedule TrainConfig::cl_schedule() const {
  const auto horizon = static_cast<std::int64_t>(cl_fraction * static_cast<double>(iterations));
  return {cl_p0, std::max<std::int64_t>(1, horizon)};
}

std::string to_json_line(const IterationRecord& r) {
  json j;
  j["iteration"] = r.iteration;
  j["algo"] = std::string(to_string(r.algorithm));
  j["design_digest"] = r.design_digest;
  j["pages"] = r.pages;
  j["primitives"] = r.primitives;
  j["active_fraction"] = r.active_fraction;
  j["skip_fraction"] = r.skip_fraction;
  j["mean_return_a"] = r.mean_return_a;
  j["mean_return_p"] = r.mean_return_p;
  j["success_a"] = r.success_a;
  j["success_p"] = r.success_p;
  j["regret"] = r.regret;
  j["antagonist"] = std::string(to_string(r.antagonist));
  j["best_return"] = r.best_return;
  j["adversary_loss"] = r.adversary_loss ? json(*r.adversary_loss) : json(nullptr);
  j["baseline"] = r.baseline;
  j["loss_a"] = r.loss_a;
  j["loss_p"] = r.loss_p;
  j["fault"] = r.fault ? json(*r.fault) : json(nullptr);
  return j.dump();
}

std::string to_json_lines(const EvalReport& report, std::int64_t iteration, AgentTag agent) {
  std::string out;
  for (const auto& t : report.results) {
    json j;
    j["iteration"] = iteration;
    j["agent"] = std::string(to_string(agent));
    j["task"] = t.task;
    j["difficulty"] = t.difficulty;
    j["success_rate"] = t.success_rate;
    j["mean_return"] = t.mean_return;
    j["episodes"] = t.episodes;
    j["seed"] = t.seed;
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

AdversaryConfig adversary_config(const TrainConfig& c, std::vector<PrimitiveId> subset) {
  AdversaryConfig a;
  a.max_pages = c.max_pages;
  a.design_steps = c.design_steps;
  a.hidden = c.adversary_hidden;
  a.primitive_subset = std::move(subset);
  return a;
}

const TrainConfig& validated(const TrainConfig& c) {
  c.validate();
  return c;
}

}  // namespace

Trainer::Trainer(TrainConfig config)
    : config_(validated(config)),
      subset_(config_.subset_ids()),
      agent_a_(config_.navigator, derive_seed(config_.seed, 1)),
      agent_p_(config_.navigator, derive_seed(config_.seed, 2)),
      adversary_(adversary_config(config_, subset_), derive_seed(config_.seed, 3)),
      design_rng_(derive_seed(config_.seed, 4)),
      rollout_rng_(derive_seed(config_.seed, 5)) {}

DesignSpec Trainer::design(std::optional<DesignSample>& sample) {
  switch (config_.algorithm) {
    case Algorithm::dr: return dr_sample(config_.max_pages, config_.design_steps, design_rng_, subset_);
    case Algorithm::cl:
      return cl_sample(iteration_, config_.cl_schedule(), config_.max_pages, config_.design_steps, design_rng_, subset_);
    default: break;
  }
  sample = adversary_.sample(design_rng_);
  return sample->spec;
}

IterationRecord Trainer::step() {
  IterationRecord rec;
  rec.iteration = iteration_;
  rec.algorithm = config_.algorithm;
  std::optional<DesignSample> sample;
  last_spec_ = design(sample);
  const auto& spec = last_spec_;
  rec.design_digest = digest(spec);
  rec.pages = spec.k;
  const auto placed = spec.placed();
  for (PrimitiveId id : placed) rec.primitives.push_back(catalog().at(id).name);
  rec.active_fraction = catalog().active_fraction(placed);
  rec.skip_fraction = 1.0 - static_cast<double>(placed.size()) / static_cast<double>(spec.actions.size());
  rec.baseline = baseline_;

  Website site;
  try {
    site = render(spec);
  } catch (const RenderError& e) {
    rec.fault = e.what();
    ++iteration_;
    return rec;
  }

  const EnvConfig env{config_.gamma};
  const NavigatorPolicy policy_a(agent_a_, false);
  const NavigatorPolicy policy_p(agent_p_, false);
  const auto run_a = collect(policy_a, site, config_.episodes, env, rollout_rng_, config_.workers);
  const auto run_p = collect(policy_p, site, config_.episodes, env, rollout_rng_, config_.workers);
  rec.mean_return_a = run_a.mean_return;
  rec.mean_return_p = run_p.mean_return;
  rec.success_a = run_a.success_rate;
  rec.success_p = run_p.success_rate;
  rec.best_return = std::max(run_a.mean_return, run_p.mean_return);

  if (uses_flexible_regret(config_.algorithm)) {
    const auto f = flexible_regret(run_a.mean_return, run_p.mean_return);
    rec.regret = f.regret;
    rec.antagonist = f.antagonist;
  } else {
    std::vector<double> ra, rp;
    for (const auto& t : run_a.trajectories) ra.push_back(t.ret);
    for (const auto& t : run_p.trajectories) rp.push_back(t.ret);
    rec.regret = paired_regret(ra, rp);
    rec.antagonist = AgentTag::a;
  }

  if (uses_adversary(config_.algorithm)) {
    AdversaryLossTerms terms;
    terms.regret = rec.regret;
    terms.baseline = baseline_;
    terms.best_return = rec.best_return;
    terms.lambda_budget = uses_budget(config_.algorithm) ? config_.lambda_budget : 0.0;
    terms.entropy_coef = config_.adversary_entropy_coef;
    tensor::AdamConfig adam;
    adam.lr = config_.adversary_lr;
    rec.adversary_loss = adversary_update(adversary_, *sample, terms, adam, config_.adversary_grad_clip);
    baseline_ = config_.baseline_decay * baseline_ + (1.0 - config_.baseline_decay) * rec.regret;
  }

  A2CConfig a2c;
  a2c.gamma = config_.gamma;
  a2c.value_coef = config_.value_coef;
  a2c.entropy_coef = config_.entropy_coef;
  a2c.adam.lr = config_.navigator_lr;
  a2c.grad_clip = config_.navigator_grad_clip;
  rec.loss_a = a2c_update(agent_a_, run_a.trajectories, a2c).loss;
  rec.loss_p = a2c_update(agent_p_, run_p.trajectories, a2c).loss;
  ++iteration_;
  return rec;
}

EvalReport Trainer::evaluate_agent(AgentTag tag, std::span<const TestTask> tasks, int episodes,
                                   std::uint64_t seed) const {
  const NavigatorPolicy policy(agent(tag), true);
  return evaluate(policy, tasks, episodes, seed, EnvConfig{config_.gamma}, config_.workers);
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void save_checkpoints(const Trainer& trainer, const std::filesystem::path& dir, const std::string& suffix) {
  tensor::save_checkpoint(trainer.agent(AgentTag::a).params(), dir / ("agent_A" + suffix + ".rfck"));
  tensor::save_checkpoint(trainer.agent(AgentTag::p).params(), dir / ("agent_P" + suffix + ".rfck"));
  if (uses_adversary(trainer.config().algorithm)) {
    tensor::save_checkpoint(trainer.adversary().params(), dir / ("adversary" + suffix + ".rfck"));
  }
}

}  // namespace

TrainSummary train(const TrainConfig& config, const std::filesystem::path& run_dir,
                   const std::function<void(const std::string&)>& log) {
  config.validate();
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  namespace fs = std::filesystem;
  fs::create_directories(run_dir / "checkpoints");
  const auto tasks = select_tasks(config.eval_tasks);
  const std::uint64_t eval_seed = derive_seed(config.seed, 6);

  json manifest;
  manifest["config"] = json::parse(config_to_json(config));
  manifest["version"] = std::string(library_version());
  manifest["seeds"] = {{"run", config.seed}, {"eval", eval_seed}};
  manifest["outputs"] = {{"metrics", "metrics.jsonl"},
                         {"eval", "eval.jsonl"},
                         {"eval_csv", "eval_<iteration>_<agent>.csv"},
                         {"checkpoints", "checkpoints/"}};
  manifest["started_at"] = utc_now();
  write_text(run_dir / "manifest.json", manifest.dump(2) + "\n");

  std::ofstream metrics(run_dir / "metrics.jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream evals(run_dir / "eval.jsonl", std::ios::binary | std::ios::trunc);
  if (!metrics || !evals) throw std::runtime_error("cannot open metrics files in " + run_dir.string());

  Trainer trainer(config);
  TrainSummary summary;
  summary.run_dir = run_dir;
  auto run_eval = [&](std::int64_t iter) {
    summary.final_eval.clear();
    for (AgentTag tag : {AgentTag::a, AgentTag::p}) {
      auto report = trainer.evaluate_agent(tag, tasks, config.eval_episodes, eval_seed);
      evals << to_json_lines(report, iter, tag);
      write_text(run_dir / ("eval_" + std::to_string(iter) + "_" + std::string(to_string(tag)) + ".csv"),
                 to_csv(report));
      say("eval iter " + std::to_string(iter) + " agent " + std::string(to_string(tag)) + ": difficulty-1 success " +
          std::to_string(report.by_difficulty[0]));
      summary.final_eval.push_back(std::move(report));
    }
    evals.flush();
  };

  for (std::int64_t i = 0; i < config.iterations; ++i) {
    const auto rec = trainer.step();
    metrics << to_json_line(rec) << '\n';
    if (rec.fault) say("iteration " + std::to_string(i) + " fault: " + *rec.fault);
    const std::int64_t done = i + 1;
    if (done % 100 == 0 || done == config.iterations) {
      metrics.flush();
      say("iteration " + std::to_string(done) + "/" + std::to_string(config.iterations) + " regret " +
          std::to_string(rec.regret) + " active " + std::to_string(rec.active_fraction));
    }
    const bool last = done == config.iterations;
    if ((config.eval_every > 0 && done % config.eval_every == 0) || last) {
      run_eval(done);
    }
    if (config.checkpoint_every > 0 && done % config.checkpoint_every == 0) {
      save_checkpoints(trainer, run_dir / "checkpoints", "_" + std::to_string(done));
    }
  }
  if (config.iterations == 0) run_eval(0);
  save_checkpoints(trainer, run_dir / "checkpoints", "");
  summary.iterations = trainer.iteration();

  json done;
  done["iterations"] = summary.iterations;
  done["finished_at"] = utc_now();
  write_text(run_dir / "completed.json", done.dump(2) + "\n");
  return summary;
}

}  // namespace regretforge
