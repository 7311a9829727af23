#include "wbplan/cli.hpp"

#include "wbplan/render.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <limits>

namespace wbplan {

namespace fs = std::filesystem;

PlanResult run(const RunConfig& config) {
  const OccupancyGrid grid = load_map_file(config.map_path.string());
  const RobotShape shape = load_shape_file(config.shape_path.string());
  PlanResult result = plan(grid, shape, config.start, config.goal, config.plan);

  const fs::path& dir = config.out_dir;
  fs::create_directories(dir);
  write_text_file(dir / "metrics.txt", metrics_document(result, config.record_timings));
  write_text_file(dir / "metrics.json", metrics_json(result, config.record_timings));
  write_text_file(dir / "table.txt", metrics_table(result, config.record_timings));
  if (result.status == PlanStatus::Success) write_text_file(dir / "trajectory.txt", serialize(result.trajectory));

  if (config.render) {
    const World world = prepare_world(grid, shape, config.plan);
    write_text_file(dir / "candidates.svg", render_candidates(world, result.candidates, config.start, config.goal));
    for (std::size_t i = 0; i < result.candidates.size(); ++i)
      write_text_file(dir / ("sequence_" + std::to_string(i) + ".svg"), render_sequence(world, result.candidates[i]));
    if (result.status == PlanStatus::Success) {
      write_text_file(dir / "trajectory.svg", render_trajectory(grid, result.trajectory, result.provenance));
      write_text_file(dir / "swept.svg", render_swept(grid, shape, result.trajectory));
    }
  }
  return result;
}

namespace {

struct Stat {
  double sum{0.0}, lo{std::numeric_limits<double>::infinity()}, hi{-std::numeric_limits<double>::infinity()};
  int n{0};
  void add(double v) {
    sum += v, lo = std::min(lo, v), hi = std::max(hi, v), ++n;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

}  // namespace

BenchSummary bench(const fs::path& config_dir, int reps, long base_seed, const fs::path& out_dir, bool render,
                   bool record_timings) {
  if (reps < 1) throw ArgumentError("repetitions must be at least 1");
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(config_dir))
    if (e.is_regular_file() && e.path().extension() == ".ini") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) throw ParseError("no .ini configs in " + config_dir.string());

  const char* keys[] = {"time.refine", "time.r2", "time.se2", "time.total", "len.r2", "len.se2", "len.total"};
  std::map<std::string, Stat> stats;
  BenchSummary summary;
  for (const auto& path : configs) {
    RunConfig rc = load_run_config(path);
    const auto seed0 = base_seed < 0 ? static_cast<long>(rc.plan.roadmap.seed) : base_seed;
    for (int r = 0; r < reps; ++r) {
      RunConfig c = rc;
      c.plan.roadmap.seed = static_cast<std::uint64_t>(seed0 + r);
      c.out_dir = out_dir / path.stem() / ("rep_" + std::to_string(r));
      c.render = render;
      c.record_timings = record_timings;
      const PlanResult res = run(c);
      ++summary.runs;
      if (res.status != PlanStatus::Success || !res.certificate.clear()) continue;
      ++summary.successes;
      const auto m = parse_metrics(metrics_document(res, record_timings));
      for (const char* k : keys) stats[k].add(std::stod(m.at(k)));
    }
  }

  std::string& doc = summary.document;
  doc += "configs = " + std::to_string(configs.size()) + "\n";
  doc += "repetitions = " + std::to_string(reps) + "\n";
  doc += "runs = " + std::to_string(summary.runs) + "\n";
  doc += "successes = " + std::to_string(summary.successes) + "\n";
  doc += "success_rate = " + fmt(double(summary.successes) / summary.runs) + "\n";
  for (const char* k : keys) {
    const Stat& s = stats[k];
    const bool any = s.n > 0;
    doc += std::string(k) + ".mean = " + fmt(any ? s.sum / s.n : 0.0) + "\n";
    doc += std::string(k) + ".min = " + fmt(any ? s.lo : 0.0) + "\n";
    doc += std::string(k) + ".max = " + fmt(any ? s.hi : 0.0) + "\n";
  }
  write_text_file(out_dir / "bench.txt", doc);
  return summary;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Whole-body SE(2) trajectory planner"};
  app.require_subcommand(1);
  bool render = false, no_timings = false;
  long seed = -1;
  std::string out_dir;
  app.add_flag("--render", render, "write SVG renderings");
  app.add_option("--seed", seed, "roadmap seed (overrides the config)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_flag("--no-timings", no_timings, "write zero timings so metrics are byte-stable");

  std::string config_path;
  auto* plan_cmd = app.add_subcommand("plan", "plan one query from a config file");
  plan_cmd->add_option("config", config_path, "config file")->required();

  std::string bench_dir;
  int reps = 1;
  auto* bench_cmd = app.add_subcommand("bench", "run every config in a directory repeatedly");
  bench_cmd->add_option("config-dir", bench_dir, "directory of .ini configs")->required();
  bench_cmd->add_option("--reps", reps, "repetitions per config")->check(CLI::PositiveNumber);
  for (auto* sub : {plan_cmd, bench_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSuccess : kExitParse;
  }

  try {
    if (*plan_cmd) {
      RunConfig rc = load_run_config(config_path);
      if (seed >= 0) rc.plan.roadmap.seed = static_cast<std::uint64_t>(seed);
      if (!out_dir.empty()) rc.out_dir = out_dir;
      rc.render = rc.render || render;
      rc.record_timings = rc.record_timings && !no_timings;
      const PlanResult res = run(rc);
      for (const auto& w : res.warnings) err << "warning: " << w << "\n";
      out << metrics_table(res, rc.record_timings);
      out << "status: " << to_string(res.status) << "\n";
      if (res.status != PlanStatus::Success) {
        err << res.message << "\n";
        return kExitPlanFailure;
      }
      return kExitSuccess;
    }
    const BenchSummary s = bench(bench_dir, reps, seed, out_dir.empty() ? fs::path("bench_out") : fs::path(out_dir),
                                 render, !no_timings);
    out << s.document;
    return kExitSuccess;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const MapError& e) {
    err << "map error: " << e.what() << "\n";
    return kExitParse;
  } catch (const GeometryError& e) {
    err << "shape error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace wbplan
