// regretforge command-line entry point: train / eval / render / gradcheck.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regretforge/bench.hpp"
#include "regretforge/config.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/generators.hpp"
#include "regretforge/gradcheck_suite.hpp"
#include "regretforge/navigator.hpp"
#include "regretforge/site.hpp"
#include "regretforge/trainer.hpp"

namespace fs = std::filesystem;
using namespace regretforge;

namespace {

constexpr int kUsageError = 2;

void log_line(const std::string& msg) { std::cerr << "[regretforge] " << msg << std::endl; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Flags that mirror config leaf keys; only the ones given on the command line override.
struct TrainFlags {
  std::optional<std::string> config;
  std::optional<std::string> algo, out, subset, eval_tasks;
  std::optional<std::int64_t> iters, eval_every, checkpoint_every;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers, K, N, M, eval_episodes;
  std::optional<double> lambda;
};

template <typename T>
void push(std::vector<std::pair<std::string, std::string>>& out, const char* key, const std::optional<T>& v) {
  if (!v) return;
  if constexpr (std::is_same_v<T, std::string>) {
    out.emplace_back(key, *v);
  } else {
    std::ostringstream ss;
    ss.precision(17);
    ss << *v;
    out.emplace_back(key, ss.str());
  }
}

int cmd_train(const TrainFlags& f) {
  std::vector<std::pair<std::string, std::string>> overrides;
  push(overrides, "algo", f.algo);
  push(overrides, "iters", f.iters);
  push(overrides, "seed", f.seed);
  push(overrides, "workers", f.workers);
  push(overrides, "eval_every", f.eval_every);
  push(overrides, "eval_episodes", f.eval_episodes);
  push(overrides, "eval_tasks", f.eval_tasks);
  push(overrides, "checkpoint_every", f.checkpoint_every);
  push(overrides, "lambda_budget", f.lambda);
  push(overrides, "K", f.K);
  push(overrides, "N", f.N);
  push(overrides, "M", f.M);
  push(overrides, "primitive_subset", f.subset);

  TrainConfig config;
  try {
    config = resolve_config(f.config ? std::optional<fs::path>(*f.config) : std::nullopt, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  const fs::path out =
      f.out ? fs::path(*f.out) : fs::path("runs") / (std::string(to_string(config.algorithm)) + "-seed" + std::to_string(config.seed));
  log_line("training " + std::string(to_string(config.algorithm)) + " for " + std::to_string(config.iterations) +
           " iterations into " + out.string());
  const auto summary = train(config, out, log_line);
  log_line("done: " + std::to_string(summary.iterations) + " iterations");
  std::cout << out.string() << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, bool oracle, const std::string& tasks_sel, int episodes,
             std::uint64_t seed, int workers, const std::optional<std::string>& out) {
  std::vector<TestTask> tasks;
  try {
    tasks = select_tasks(tasks_sel);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  EvalReport report;
  if (oracle) {
    report = evaluate(OraclePolicy{}, tasks, episodes, seed, {}, workers);
  } else {
    if (checkpoint.empty()) {
      std::cerr << "error: --checkpoint is required unless --oracle is given\n";
      return kUsageError;
    }
    if (!fs::is_regular_file(checkpoint)) {
      std::cerr << "error: checkpoint not found: " << checkpoint << "\n";
      return kUsageError;
    }
    std::optional<Navigator> nav;
    try {
      nav.emplace(tensor::load_checkpoint(checkpoint));
    } catch (const std::exception& e) {
      std::cerr << "error: cannot load navigator checkpoint " << checkpoint << ": " << e.what() << "\n";
      return kUsageError;
    }
    report = evaluate(NavigatorPolicy(*nav, true), tasks, episodes, seed, {}, workers);
  }
  const std::string csv = to_csv(report);
  std::cout << csv;
  if (out) {
    fs::create_directories(*out);
    write_file(fs::path(*out) / "eval.csv", csv);
    write_file(fs::path(*out) / "eval.jsonl", to_json_lines(report, 0, AgentTag::a));
  }
  return 0;
}

struct RenderFlags {
  std::string spec_file;
  std::string sample;
  std::string task;
  std::uint64_t seed = 0;
  int K = 3;
  int N = 8;
  std::int64_t iteration = 0;
  std::string out = "render";
};

int cmd_render(const RenderFlags& f) {
  const int sources = !f.spec_file.empty() + !f.sample.empty() + !f.task.empty();
  if (sources != 1) {
    std::cerr << "error: give exactly one of SPEC_FILE, --sample or --task\n";
    return kUsageError;
  }
  DesignSpec spec;
  if (!f.spec_file.empty()) {
    try {
      spec = design_from_text(read_file(f.spec_file));
    } catch (const ParseError& e) {
      std::cerr << f.spec_file << ":" << e.line() << ":" << e.column() << ": error: " << e.message() << "\n";
      return kUsageError;
    } catch (const ArgumentError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kUsageError;
    }
  } else if (!f.task.empty()) {
    std::vector<TestTask> tasks;
    try {
      tasks = select_tasks(f.task);
    } catch (const ArgumentError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kUsageError;
    }
    if (tasks.size() != 1) {
      std::cerr << "error: --task must select exactly one task (e.g. login:4)\n";
      return kUsageError;
    }
    spec = tasks.front().spec;
  } else {
    std::mt19937_64 rng(f.seed);
    if (f.sample == "dr") {
      spec = dr_sample(f.K, f.N, rng);
    } else if (f.sample == "cl") {
      spec = cl_sample(f.iteration, ClSchedule{}, f.K, f.N, rng);
    } else {
      AdversaryConfig cfg;
      cfg.max_pages = f.K;
      cfg.design_steps = f.N;
      AdversaryPolicy adv(cfg, derive_seed(f.seed, 3));
      spec = adv.sample(rng).spec;
    }
  }
  RenderReport rep;
  const Website site = render(spec, &rep);
  fs::create_directories(f.out);
  write_html(site, f.out);
  write_file(fs::path(f.out) / "spec.gmds", to_text(spec));
  write_file(fs::path(f.out) / "site.gmwb", serialize(site));
  std::cout << to_text(spec);
  log_line("wrote " + std::to_string(site.page_count()) + " page(s) to " + f.out + " (advance repairs " +
           std::to_string(rep.advance_repairs) + ", submit repaired " + (rep.submit_repaired ? "yes" : "no") + ")");
  return 0;
}

int cmd_gradcheck(double tolerance, std::uint64_t seed, const std::string& corrupt) {
  if (!corrupt.empty()) {
    if (corrupt != "tanh") {
      std::cerr << "error: --corrupt-op supports only 'tanh'\n";
      return kUsageError;
    }
    tensor::debug::set_corrupt_tanh_gradient(true);
  }
  tensor::GradCheckOptions opts;
  opts.tolerance = tolerance;
  opts.seed = seed;
  bool all = true;
  std::printf("%-24s %14s %8s  %s\n", "model", "max_rel_err", "coords", "result");
  for (const auto& e : run_gradcheck_suite(opts)) {
    all = all && e.report.passed;
    std::printf("%-24s %14.3e %8zu  %s  worst %s[%zu] analytic %.6e numeric %.6e\n", e.model.c_str(),
                e.report.max_rel_err, e.report.coords_checked, e.report.passed ? "PASS" : "FAIL",
                e.report.worst_param.c_str(), e.report.worst_index, e.report.worst_analytic, e.report.worst_numeric);
  }
  std::printf("gradcheck %s at tolerance %.1e\n", all ? "PASS" : "FAIL", tolerance);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regretforge: adversarial website generation and web-navigation training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Train two navigators against a website generator");
  train_cmd->add_option("--config", tf.config, "JSON config file");
  train_cmd->add_option("--algo", tf.algo, "paired | flexible | flexible_b | paired_b | dr | cl");
  train_cmd->add_option("--iters", tf.iters, "Training iterations");
  train_cmd->add_option("--seed", tf.seed, "Run seed");
  train_cmd->add_option("--workers", tf.workers, "Rollout worker threads");
  train_cmd->add_option("--out", tf.out, "Run directory");
  train_cmd->add_option("--eval-every", tf.eval_every, "Benchmark evaluation cadence (0 = at the end only)");
  train_cmd->add_option("--eval-episodes", tf.eval_episodes, "Episodes per task per evaluation");
  train_cmd->add_option("--eval-tasks", tf.eval_tasks, "Task selector, e.g. login:1,address");
  train_cmd->add_option("--checkpoint-every", tf.checkpoint_every, "Checkpoint cadence (0 = final only)");
  train_cmd->add_option("--lambda-budget", tf.lambda, "Budget term weight");
  train_cmd->add_option("--K", tf.K, "Maximum pages");
  train_cmd->add_option("--N", tf.N, "Design steps");
  train_cmd->add_option("--M", tf.M, "Trajectories per agent per iteration");
  train_cmd->add_option("--primitive-subset", tf.subset, "Comma-separated primitive names");

  std::string checkpoint, tasks_sel = "all";
  bool oracle = false;
  int episodes = 100, eval_workers = 1;
  std::uint64_t eval_seed = 0;
  std::optional<std::string> eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy benchmark evaluation of a navigator checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint, "Navigator checkpoint (.rfck)");
  eval_cmd->add_flag("--oracle", oracle, "Evaluate the scripted oracle instead of a checkpoint");
  eval_cmd->add_option("--tasks", tasks_sel, "Task selector, e.g. login:1,address");
  eval_cmd->add_option("--episodes", episodes, "Episodes per task")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval_seed, "Evaluation seed");
  eval_cmd->add_option("--workers", eval_workers, "Worker threads")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", eval_out, "Directory for eval.csv / eval.jsonl");

  RenderFlags rf;
  auto* render_cmd = app.add_subcommand("render", "Render a design spec to HTML");
  render_cmd->add_option("spec", rf.spec_file, "GMDS/1 design file");
  render_cmd->add_option("--sample", rf.sample, "Sample a design instead")->check(CLI::IsMember({"dr", "cl", "adversary"}));
  render_cmd->add_option("--task", rf.task, "Render a benchmark task, e.g. login:4");
  render_cmd->add_option("--seed", rf.seed, "Sampling seed");
  render_cmd->add_option("--K", rf.K, "Maximum pages")->check(CLI::PositiveNumber);
  render_cmd->add_option("--N", rf.N, "Design steps")->check(CLI::PositiveNumber);
  render_cmd->add_option("--iteration", rf.iteration, "Curriculum iteration for --sample cl");
  render_cmd->add_option("--out", rf.out, "Output directory");

  double tolerance = 1e-4;
  std::uint64_t gc_seed = 0;
  std::string corrupt;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every registered model");
  gc_cmd->add_option("--tolerance", tolerance, "Relative error threshold");
  gc_cmd->add_option("--seed", gc_seed, "Seed for fixtures and coordinate subsampling");
  gc_cmd->add_option("--corrupt-op", corrupt, "Negative control: corrupt one op's gradient (tanh)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*train_cmd) return cmd_train(tf);
    if (*eval_cmd) return cmd_eval(checkpoint, oracle, tasks_sel, episodes, eval_seed, eval_workers, eval_out);
    if (*render_cmd) return cmd_render(rf);
    if (*gc_cmd) return cmd_gradcheck(tolerance, gc_seed, corrupt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
