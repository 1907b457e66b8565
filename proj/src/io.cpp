#include "adamlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace adamlab {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

void write_trajectory_jsonl(std::ostream& out, const TrajectoryLog& log, bool include_x) {
  for (const StepRecord& rec : log.records) {
    json j;
    j["t"] = rec.t;
    j["k"] = rec.k;
    j["i"] = rec.i ? json(*rec.i) : json(nullptr);
    j["batch"] = rec.batch;
    j["eta"] = number(rec.eta);
    j["objective"] = number(rec.objective);
    j["full_grad_norm"] = number(rec.full_grad_norm);
    j["step_norm"] = number(rec.step_norm);
    j["x_norm"] = number(rec.x_norm);
    if (include_x && rec.snapshot) {
      json x = json::array();
      for (double v : rec.snapshot->x_after) x.push_back(number(v));
      j["x"] = std::move(x);
    }
    out << j.dump() << '\n';
  }
}

std::string concentration_json(const ConcentrationReport& r) {
  json j;
  j["qualifying_steps"] = r.qualifying_steps;
  j["lower_violations"] = r.lower_violations;
  j["upper_violations"] = r.upper_violations;
  j["empirical_rate"] = number(r.empirical_rate);
  j["p_bound"] = number(r.p_bound);
  j["c_lower"] = number(r.c_lower);
  j["c_upper"] = number(r.c_upper);
  j["precondition_ok"] = r.precondition_ok;
  j["first_qualifying_k"] = r.first_qualifying_k;
  j["within_bound"] = r.within_bound ? json(*r.within_bound) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string violations_json(const std::vector<Violation>& violations) {
  json arr = json::array();
  for (const Violation& v : violations) {
    arr.push_back({{"t", v.t},
                   {"coordinate", v.coordinate},
                   {"quantity", v.quantity},
                   {"value", number(v.value)},
                   {"bound", number(v.bound)}});
  }
  return arr.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& bytes) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace adamlab
