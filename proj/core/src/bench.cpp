#include "regretforge/bench.hpp"

#include <cstdio>
#include <random>
#include <sstream>

#include "line_reader.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/site.hpp"
#include "regretforge/text.hpp"

namespace regretforge {

namespace data {
extern const std::string_view benchmark_specs;
}

std::string TestTask::id() const { return name + ":" + std::to_string(difficulty); }

std::string_view benchmark_source() { return data::benchmark_specs; }

std::vector<TestTask> parse_suite(std::string_view text) {
  std::vector<TestTask> tasks;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::string body;
  std::size_t body_line = 0;
  auto flush = [&] {
    if (tasks.empty()) return;
    try {
      tasks.back().spec = design_from_text(body);
    } catch (const ParseError& e) {
      throw ParseError(std::string("task ") + tasks.back().id() + ": " + e.message(), body_line + e.line(), e.column());
    }
    body.clear();
  };
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    const auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (line.starts_with("task ")) {
      flush();
      detail::LineReader in(line);
      in.next();
      in.expect_count(3);
      TestTask t;
      t.name = in.word(1).text;
      t.difficulty = static_cast<int>(in.integer(2));
      if (t.difficulty < 1 || t.difficulty > 4) throw ParseError("difficulty must be 1..4", line_no, in.word(2).column);
      tasks.push_back(std::move(t));
      body_line = line_no;
      continue;
    }
    if (tasks.empty()) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first != std::string_view::npos && line[first] != '#') throw ParseError("expected 'task' header", line_no, 1);
      continue;
    }
    body.append(line);
    body.push_back('\n');
  }
  flush();
  return tasks;
}

const std::vector<TestTask>& test_suite() {
  static const std::vector<TestTask> suite = parse_suite(benchmark_source());
  return suite;
}

std::vector<TestTask> select_tasks(std::string_view selector) {
  const auto& suite = test_suite();
  if (selector.empty() || selector == "all") return suite;
  std::vector<TestTask> out;
  std::size_t pos = 0;
  while (pos <= selector.size()) {
    const auto comma = selector.find(',', pos);
    auto item = selector.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    pos = comma == std::string_view::npos ? selector.size() + 1 : comma + 1;
    if (item.empty()) continue;
    std::string_view name = item;
    int difficulty = 0;
    if (const auto colon = item.find(':'); colon != std::string_view::npos) {
      name = item.substr(0, colon);
      const std::string d(item.substr(colon + 1));
      if (d.size() != 1 || d[0] < '1' || d[0] > '4') {
        throw ArgumentError("task selector '" + std::string(item) + "': difficulty must be 1..4");
      }
      difficulty = d[0] - '0';
    }
    bool matched = false;
    for (const auto& t : suite) {
      if (t.name == name && (difficulty == 0 || t.difficulty == difficulty)) {
        out.push_back(t);
        matched = true;
      }
    }
    if (!matched) throw ArgumentError("task selector '" + std::string(item) + "' matches no task");
  }
  return out;
}

const TaskResult* EvalReport::find(std::string_view task, int difficulty) const {
  for (const auto& r : results) {
    if (r.task == task && r.difficulty == difficulty) return &r;
  }
  return nullptr;
}

std::uint64_t task_seed(std::uint64_t seed, const TestTask& task) {
  // splitmix64 finalizer over the run seed mixed with the task id
  std::uint64_t z = seed ^ text::fnv1a64(task.id());
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

EvalReport evaluate(const NavPolicy& policy, std::span<const TestTask> tasks, int episodes, std::uint64_t seed,
                    const EnvConfig& env, int workers) {
  if (episodes < 1) throw ArgumentError("evaluate: episodes must be >= 1");
  EvalReport report;
  report.episodes = episodes;
  report.seed = seed;
  std::array<int, 4> counts{};
  for (const auto& task : tasks) {
    const Website site = render(task.spec);
    std::mt19937_64 rng(task_seed(seed, task));
    const auto res = collect(policy, site, episodes, env, rng, workers);
    report.results.push_back({task.name, task.difficulty, res.success_rate, res.mean_return, episodes, seed});
    const auto d = static_cast<std::size_t>(task.difficulty - 1);
    report.by_difficulty[d] += res.success_rate;
    ++counts[d];
  }
  for (std::size_t d = 0; d < 4; ++d) {
    if (counts[d] > 0) report.by_difficulty[d] /= counts[d];
  }
  return report;
}

std::string to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "task,difficulty,success_rate,episodes,seed\n";
  char rate[32];
  for (const auto& r : report.results) {
    std::snprintf(rate, sizeof rate, "%.6f", r.success_rate);
    out << r.task << ',' << r.difficulty << ',' << rate << ',' << r.episodes << ',' << r.seed << '\n';
  }
  return out.str();
}

ComplexityMetrics complexity_metrics(std::span<const DesignSpec> stream) {
  if (stream.empty()) throw ArgumentError("complexity_metrics: empty spec stream");
  ComplexityMetrics m;
  const auto& cat = catalog();
  const std::size_t n = stream.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto placed = stream[i].placed();
    m.active_fraction.push_back(cat.active_fraction(placed));
    const std::size_t window = std::min<std::size_t>(2, 3 * i / n);
    for (PrimitiveId id : placed) {
      ++m.histogram[static_cast<std::size_t>(id)];
      ++m.windows[window][static_cast<std::size_t>(id)];
    }
  }
  return m;
}

}  // namespace regretforge
