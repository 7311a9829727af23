#include "wbplan/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace wbplan {

namespace {

namespace pt = boost::property_tree;

double to_double(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  double v = 0.0;
  if (!(in >> v) || !(in >> std::ws).eof()) throw ParseError(key + ": expected a number, got '" + text + "'");
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  long v = 0;
  if (!(in >> v) || !(in >> std::ws).eof()) throw ParseError(key + ": expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ParseError(key + ": expected a boolean, got '" + text + "'");
}

Pose2 to_pose(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  Pose2 p;
  if (!(in >> p.position.x() >> p.position.y() >> p.yaw) || !(in >> std::ws).eof())
    throw ParseError(key + ": expected 'x y yaw', got '" + text + "'");
  return p;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct Row {
  std::string key;
  std::string value;
};

std::vector<Row> metric_rows(const PlanResult& r, bool timings) {
  const auto& m = r.metrics;
  auto t = [&](double v) { return fmt("%.6f", timings ? v : 0.0); };
  auto l = [](double v) { return fmt("%.9f", v); };
  int se2 = 0, r2 = 0, reopt = 0;
  for (auto s : r.provenance) (s == PieceSource::SE2 ? se2 : s == PieceSource::R2 ? r2 : reopt)++;
  return {
      {"status", to_string(r.status)},
      {"candidates.tried", std::to_string(m.candidates_tried)},
      {"candidates.survived", std::to_string(m.candidates_survived)},
      {"time.refine", t(m.time.refine)},
      {"time.r2", t(m.time.r2)},
      {"time.se2", t(m.time.se2)},
      {"time.total", t(m.time.total)},
      {"len.r2", l(m.len_r2)},
      {"len.se2", l(m.len_se2)},
      {"len.total", l(m.len_total)},
      {"trajectory.duration", l(r.trajectory.empty() ? 0.0 : r.trajectory.total_duration())},
      {"trajectory.pieces", std::to_string(r.trajectory.pieces())},
      {"pieces.se2", std::to_string(se2)},
      {"pieces.r2", std::to_string(r2)},
      {"pieces.r2_reoptimized", std::to_string(reopt)},
      {"certificate.clear", r.status == PlanStatus::Success && r.certificate.clear() ? "true" : "false"},
      {"timings.recorded", timings ? "true" : "false"},
  };
}

}  // namespace

RunConfig parse_run_config(const std::string& document, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(document);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig rc;
  PlanConfig& pc = rc.plan;
  bool have_map = false, have_robot = false, have_start = false, have_goal = false;
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base_dir / p;
  };

  using Setter = std::function<void(const std::string& key, const std::string& value)>;
  auto d = [](double& dst) -> Setter { return [&dst](auto& k, auto& v) { dst = to_double(k, v); }; };
  auto i = [](int& dst) -> Setter { return [&dst](auto& k, auto& v) { dst = to_int(k, v); }; };
  const std::map<std::string, Setter> setters{
      {"map.file", [&](auto&, auto& v) { rc.map_path = path(v), have_map = true; }},
      {"robot.file", [&](auto&, auto& v) { rc.shape_path = path(v), have_robot = true; }},
      {"query.start", [&](auto& k, auto& v) { rc.start = to_pose(k, v), have_start = true; }},
      {"query.goal", [&](auto& k, auto& v) { rc.goal = to_pose(k, v), have_goal = true; }},
      {"planner.seed", [&](auto& k, auto& v) { pc.roadmap.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"planner.budget", i(pc.roadmap.budget)},
      {"planner.connection_radius", d(pc.roadmap.connection_radius)},
      {"planner.max_paths", i(pc.max_paths)},
      {"planner.max_candidates", i(pc.max_candidates)},
      {"planner.max_path_vertices", i(pc.max_path_vertices)},
      {"planner.n_orientations", i(pc.n_orientations)},
      {"planner.search_range", i(pc.search_range)},
      {"planner.max_depth", i(pc.max_depth)},
      {"planner.context_pad", i(pc.context_pad)},
      {"planner.push_attempts", i(pc.push_attempts)},
      {"planner.push_margin", d(pc.push_margin)},
      {"planner.check_margin", d(pc.check_margin)},
      {"planner.max_iterations", i(pc.solver.lbfgs.max_iterations)},
      {"planner.se2_piece_length", d(pc.solver.se2_piece_length)},
      {"planner.r2_piece_length", d(pc.solver.r2_piece_length)},
      {"planner.max_pieces", i(pc.solver.max_pieces)},
      {"weights.lambda_m", d(pc.weights.lambda_m)},
      {"weights.lambda_t", d(pc.weights.lambda_t)},
      {"weights.lambda_s", d(pc.weights.lambda_s)},
      {"weights.lambda_d", d(pc.weights.lambda_d)},
      {"weights.lambda_p", d(pc.weights.lambda_p)},
      {"weights.lambda_r", d(pc.weights.lambda_r)},
      {"weights.mu", d(pc.weights.mu)},
      {"weights.d_safe", d(pc.weights.d_safe)},
      {"weights.v_max", d(pc.weights.v_max)},
      {"weights.omega_max", d(pc.weights.omega_max)},
      {"output.dir", [&](auto&, auto& v) { rc.out_dir = path(v); }},
      {"output.render", [&](auto& k, auto& v) { rc.render = to_bool(k, v); }},
      {"output.timings", [&](auto& k, auto& v) { rc.record_timings = to_bool(k, v); }},
  };

  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ParseError("key '" + section + "' outside of a section");
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      const auto it = setters.find(key);
      if (it == setters.end()) throw ParseError("unknown config key '" + key + "'");
      it->second(key, node.data());
    }
  }
  if (!have_map) throw ParseError("missing [map] file");
  if (!have_robot) throw ParseError("missing [robot] file");
  if (!have_start || !have_goal) throw ParseError("missing [query] start or goal");
  for (const auto& p : {rc.map_path, rc.shape_path})
    if (!std::filesystem::exists(p)) throw ParseError("file not found: " + p.string());
  try {
    pc.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(e.what());
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text_file(path), path.parent_path());
}

std::string metrics_document(const PlanResult& result, bool record_timings) {
  std::string out;
  for (const auto& r : metric_rows(result, record_timings)) out += r.key + " = " + r.value + "\n";
  return out;
}

std::string metrics_json(const PlanResult& result, bool record_timings) {
  nlohmann::ordered_json j;
  for (const auto& r : metric_rows(result, record_timings)) j[r.key] = r.value;
  j["message"] = result.message;
  j["warnings"] = result.warnings;
  return j.dump(2) + "\n";
}

std::string metrics_table(const PlanResult& result, bool record_timings) {
  const auto& m = result.metrics;
  const double k = record_timings ? 1.0 : 0.0;
  auto cell = [](double v) { return fmt("%14.4f", v); };
  std::string out;
  out += "              Path Refine   Trajectory R2  Trajectory SE2           Total\n";
  out += "Time (s)   " + cell(k * m.time.refine) + "  " + cell(k * m.time.r2) + "  " +
         cell(k * m.time.se2) + "  " + cell(k * m.time.total) + "\n";
  out += "Length (m) " + std::string(14, ' ') + "-  " + cell(m.len_r2) + "  " + cell(m.len_se2) +
         "  " + cell(m.len_total) + "\n";
  return out;
}

std::map<std::string, std::string> parse_metrics(const std::string& document) {
  std::map<std::string, std::string> out;
  std::istringstream in(document);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw ParseError("metrics line without ' = ': " + line);
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace wbplan
